use std::f64::consts::PI;

use crate::error::{Error, Result};

/// One-dimensional factors: 1, cos, sin, cos 2x, sin 2x.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Harmonic {
    One,
    Cos,
    Sin,
    Cos2,
    Sin2,
}

use Harmonic::*;

impl Harmonic {
    #[inline]
    pub(crate) fn eval(self, x: f64) -> f64 {
        // orthonormal on [-pi, pi]
        let c0 = 1.0 / (2.0 * PI).sqrt();
        let c1 = 1.0 / PI.sqrt();
        match self {
            One => c0,
            Cos => c1 * x.cos(),
            Sin => c1 * x.sin(),
            Cos2 => c1 * (2.0 * x).cos(),
            Sin2 => c1 * (2.0 * x).sin(),
        }
    }
}

const BASIS_9: [(Harmonic, Harmonic); 9] = [
    (One, One),
    (Cos, One),
    (Sin, One),
    (One, Cos),
    (One, Sin),
    (Cos, Cos),
    (Cos, Sin),
    (Sin, Cos),
    (Sin, Sin),
];

/// Truncated orthonormal basis of products of low harmonics on `[-pi, pi]^2`.
///
/// Size 9 uses `{1, cos, sin}` per axis, size 25 adds `{cos 2p, sin 2p}`. The
/// first nine functions of the 25-basis coincide with the 9-basis and
/// function 0 is the constant `1/(2 pi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormFactorBasis {
    functions: Vec<(Harmonic, Harmonic)>,
}

impl FormFactorBasis {
    pub fn new(size: usize) -> Result<Self> {
        let functions = match size {
            9 => BASIS_9.to_vec(),
            25 => {
                let all = [One, Cos, Sin, Cos2, Sin2];
                let mut v = BASIS_9.to_vec();
                for &x in &all {
                    for &y in &all {
                        if !v.contains(&(x, y)) {
                            v.push((x, y));
                        }
                    }
                }
                v
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "form-factor basis size must be 9 or 25, got {size}"
                )))
            }
        };
        Ok(FormFactorBasis { functions })
    }

    pub fn size(&self) -> usize {
        self.functions.len()
    }

    /// `f_index(p)`.
    pub fn eval(&self, index: usize, p: [f64; 2]) -> Result<f64> {
        let (hx, hy) = self.functions.get(index).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "form-factor index {index} out of range for a basis of size {}",
                self.size()
            ))
        })?;
        Ok(hx.eval(p[0]) * hy.eval(p[1]))
    }

    pub(crate) fn factor(&self, index: usize) -> FormFactor {
        let (x, y) = self.functions[index];
        FormFactor { x, y }
    }

    /// Human-readable name, e.g. `cos(px)sin(py)`.
    pub fn describe(&self, index: usize) -> String {
        let name = |h: Harmonic, ax: &str| match h {
            One => String::new(),
            Cos => format!("cos(p{ax})"),
            Sin => format!("sin(p{ax})"),
            Cos2 => format!("cos(2p{ax})"),
            Sin2 => format!("sin(2p{ax})"),
        };
        let (x, y) = self.functions[index];
        let s = format!("{}{}", name(x, "x"), name(y, "y"));
        if s.is_empty() {
            "1".into()
        } else {
            s
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct FormFactor {
    x: Harmonic,
    y: Harmonic,
}

impl FormFactor {
    #[inline]
    pub(crate) fn eval(&self, px: f64, py: f64) -> f64 {
        self.x.eval(px) * self.y.eval(py)
    }

    pub(crate) fn parts(&self) -> (Harmonic, Harmonic) {
        (self.x, self.y)
    }
}

/// `f_index(p)` in `basis`.
pub fn form_factor(index: usize, p: [f64; 2], basis: &FormFactorBasis) -> Result<f64> {
    basis.eval(index, p)
}
