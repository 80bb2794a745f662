//! Per-integral adaptive baseline.
//!
//! Each member is integrated on its own with an isolated error target,
//! using the same pair rule and the same quadrant bisection as the global
//! driver. Comparing evaluation counts against [`crate::adaptive`] therefore
//! isolates the error strategy and nothing else.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::adaptive::{drive_single, AdaptiveConfig, ErrorMode, FamilyResult, IntegrandFamily};
use crate::error::{Error, Result};
use crate::rules::{Integrand, Rectangle};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalResult {
    pub value: f64,
    pub err: f64,
    pub threshold: f64,
    pub eval_count: u64,
    pub task_count: usize,
    pub converged: bool,
}

/// Serial adaptive loop on one integrand: always refine the worst subdomain.
///
/// `config.workers` and `config.max_task` are ignored.
pub fn run_local<F: Integrand + ?Sized>(
    member: &F,
    domain: Rectangle,
    config: &AdaptiveConfig,
) -> Result<LocalResult> {
    let cfg = AdaptiveConfig {
        workers: 1,
        max_task: 1,
        ..*config
    };
    let r = drive_single(&Dyn(member), domain, &cfg)?;
    Ok(LocalResult {
        value: r.values[0],
        err: r.global_err,
        threshold: r.threshold,
        eval_count: r.eval_count,
        task_count: r.task_count,
        converged: r.converged,
    })
}

struct Dyn<'a, F: ?Sized>(&'a F);

impl<F: Integrand + ?Sized> Integrand for Dyn<'_, F> {
    #[inline]
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.0.eval(x, y)
    }

    #[inline]
    fn eval_grid(&self, xs: &[f64], ys: &[f64], out: &mut [f64]) {
        self.0.eval_grid(xs, ys, out)
    }
}

/// How the family target is turned into per-member targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalTarget {
    /// Relative mode: `epsilon` against each member's own value, floored at
    /// `config.value_floor`. Absolute mode: `epsilon / M` each.
    MemberRelative,
    /// The family threshold for a family whose values sum to
    /// `reference_total`, split evenly into absolute member targets.
    FamilyShare { reference_total: f64 },
}

impl LocalTarget {
    pub fn as_str(&self) -> &'static str {
        match self {
            LocalTarget::MemberRelative => "member-relative",
            LocalTarget::FamilyShare { .. } => "family-share",
        }
    }
}

/// Target handed to each member by [`run_family_local`].
///
/// Absolute mode splits the family target evenly; relative mode gives every
/// member the full relative target against its own value.
pub fn member_config(config: &AdaptiveConfig, member_count: usize) -> AdaptiveConfig {
    member_config_for(config, member_count, LocalTarget::MemberRelative)
}

pub fn member_config_for(
    config: &AdaptiveConfig,
    member_count: usize,
    target: LocalTarget,
) -> AdaptiveConfig {
    let m = member_count as f64;
    let (epsilon, epsilon_mode) = match (target, config.epsilon_mode) {
        (LocalTarget::MemberRelative, ErrorMode::Absolute) => {
            (config.epsilon / m, ErrorMode::Absolute)
        }
        (LocalTarget::MemberRelative, ErrorMode::Relative) => (config.epsilon, ErrorMode::Relative),
        (LocalTarget::FamilyShare { reference_total }, _) => {
            (config.threshold(reference_total) / m, ErrorMode::Absolute)
        }
    };
    AdaptiveConfig {
        epsilon,
        epsilon_mode,
        workers: 1,
        max_task: 1,
        ..*config
    }
}

/// Run [`run_local`] on every member, members handed out to
/// `config.workers` threads from a shared FIFO counter.
pub fn run_family_local(family: &IntegrandFamily, config: &AdaptiveConfig) -> Result<FamilyResult> {
    run_family_local_with(family, config, LocalTarget::MemberRelative)
}

/// [`run_family_local`] with an explicit member-target convention.
pub fn run_family_local_with(
    family: &IntegrandFamily,
    config: &AdaptiveConfig,
    target: LocalTarget,
) -> Result<FamilyResult> {
    config.validate()?;
    if family.is_empty() {
        return Err(Error::InvalidArgument("integrand family is empty".into()));
    }
    let m = family.len();
    let cfg = member_config_for(config, m, target);
    cfg.validate()?;
    let domain = family.domain();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<LocalResult>>>> = Mutex::new(vec![None; m]);

    let work = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        if i >= m {
            break;
        }
        let r = run_local(family.member(i), domain, &cfg).map_err(|e| match e {
            Error::EvaluationFailure { x, y, value, .. } => Error::EvaluationFailure {
                member: Some(i),
                x,
                y,
                value,
            },
            Error::Singularity { domain, err, .. } => Error::Singularity {
                member: i,
                domain,
                err,
            },
            other => other,
        });
        slots.lock().unwrap()[i] = Some(r);
    };

    let threads = config.workers.min(m);
    if threads == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 1..threads {
                s.spawn(work);
            }
            work();
        });
    }

    let mut out = FamilyResult {
        values: Vec::with_capacity(m),
        global_err: 0.0,
        threshold: 0.0,
        eval_count: 0,
        member_evals: Vec::with_capacity(m),
        task_count: 0,
        refinements: 0,
        converged: true,
    };
    let per_rect = {
        let p = 2 * config.n as u64 + 1;
        p * p
    };
    for slot in slots.into_inner().unwrap() {
        let r = slot.expect("every member is visited")?;
        out.values.push(r.value);
        out.global_err += r.err;
        out.threshold += r.threshold;
        out.eval_count += r.eval_count;
        out.member_evals.push(r.eval_count);
        out.task_count += r.task_count;
        out.refinements += (r.eval_count / per_rect - 1) / 4;
        out.converged &= r.converged;
    }
    Ok(out)
}
