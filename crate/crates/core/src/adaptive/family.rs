use crate::error::{Error, Result};
use crate::rules::{Integrand, Rectangle};

/// Indexed set of scalar integrands sharing one rectangular domain.
pub struct IntegrandFamily {
    domain: Rectangle,
    members: Vec<Box<dyn Integrand + Send>>,
    labels: Vec<String>,
}

impl IntegrandFamily {
    pub fn new(domain: Rectangle) -> Self {
        IntegrandFamily {
            domain,
            members: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn push<F>(&mut self, label: impl Into<String>, f: F) -> &mut Self
    where
        F: Integrand + Send + 'static,
    {
        self.members.push(Box::new(f));
        self.labels.push(label.into());
        self
    }

    /// Builder form of [`Self::push`].
    pub fn with<F>(mut self, label: impl Into<String>, f: F) -> Self
    where
        F: Integrand + Send + 'static,
    {
        self.push(label, f);
        self
    }

    pub fn domain(&self) -> Rectangle {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn member(&self, i: usize) -> &dyn Integrand {
        self.members[i].as_ref()
    }

    pub(crate) fn member_refs(&self) -> Vec<&dyn Integrand> {
        self.members
            .iter()
            .map(|m| m.as_ref() as &dyn Integrand)
            .collect()
    }

    pub(crate) fn ensure_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::InvalidArgument("integrand family is empty".into()));
        }
        Ok(())
    }
}

impl std::fmt::Debug for IntegrandFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IntegrandFamily")
            .field("domain", &self.domain)
            .field("labels", &self.labels)
            .finish()
    }
}
