//! Scale derivative of the frequency-integrated two-propagator bubbles.
//!
//! With `G(p0, e) = theta(p0) / (i p0 - e)` and `theta(p0) = p0^2 / (p0^2 + W^2)`
//! only the regulator depends on `W`, so
//!
//! ```text
//! pp(W, e1, e2) = int dp0  d/dW[theta^2] / ((i p0 - e1)(-i p0 - e2))
//! ph(W, e1, e2) = int dp0  d/dW[theta^2] / ((i p0 - e1)( i p0 - e2))
//! ```
//!
//! Taking the even part in `p0` and splitting the partial fractions gives
//! `ph(W, e1, e2) = 4W L[e1, e2]` and `pp(W, e1, e2) = -4W L[e1, -e2]`, where
//! `L[x, y]` is the divided difference of `L(e) = e M(W, |e|)` and
//!
//! ```text
//! M(W, c) = int dp0 p0^4 / ((p0^2 + W^2)^3 (p0^2 + c^2)) = pi (W + 3c) / (8 W (W + c)^3).
//! ```
//!
//! For arguments of equal sign the divided difference is expanded as one
//! symmetric rational function, so the coalescent limit `e1 -> e2` needs no
//! special branch and does not cancel. For opposite signs the two terms of
//! the difference quotient already share their sign.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Arguments of the frequency kernels: scale and the two dispersion values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelArgs {
    pub omega: f64,
    pub e1: f64,
    pub e2: f64,
}

impl KernelArgs {
    pub fn new(omega: f64, e1: f64, e2: f64) -> Self {
        KernelArgs { omega, e1, e2 }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "scale must be positive and finite, got {}",
                self.omega
            )));
        }
        if !self.e1.is_finite() || !self.e2.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "energies must be finite, got ({}, {})",
                self.e1, self.e2
            )));
        }
        Ok(())
    }
}

/// `M(W, c)` for `c >= 0`.
#[inline]
fn moment(w: f64, c: f64) -> f64 {
    let s = w + c;
    PI * (w + 3.0 * c) / (8.0 * w * s * s * s)
}

/// `(c1 M(c1) - c2 M(c2)) / (c1 - c2)` for `c1, c2 >= 0`, including `c1 == c2`.
#[inline]
fn same_sign_difference(w: f64, c1: f64, c2: f64) -> f64 {
    let s = c1 + c2;
    let p = c1 * c2;
    let w2 = w * w;
    let num = w2 * w2 + 3.0 * w2 * w * s + 6.0 * w2 * p - w * p * s - 3.0 * p * p;
    let a = w + c1;
    let b = w + c2;
    let a3 = a * a * a;
    let b3 = b * b * b;
    PI * num / (8.0 * w * (a3 * b3))
}

/// Divided difference `L[x, y]` of `L(e) = e M(W, |e|)`.
#[inline]
fn divided_difference(w: f64, x: f64, y: f64) -> f64 {
    let (cx, cy) = (x.abs(), y.abs());
    if x == 0.0 || y == 0.0 || (x > 0.0) == (y > 0.0) {
        same_sign_difference(w, cx, cy)
    } else {
        (cx * moment(w, cx) + cy * moment(w, cy)) / (cx + cy)
    }
}

#[inline]
pub(crate) fn pp_unchecked(w: f64, e1: f64, e2: f64) -> f64 {
    -4.0 * w * divided_difference(w, e1, -e2)
}

#[inline]
pub(crate) fn ph_unchecked(w: f64, e1: f64, e2: f64) -> f64 {
    4.0 * w * divided_difference(w, e1, e2)
}

/// Particle-particle kernel.
pub fn kernel_pp(args: KernelArgs) -> Result<f64> {
    args.validate()?;
    Ok(pp_unchecked(args.omega, args.e1, args.e2))
}

/// Particle-hole kernel.
pub fn kernel_ph(args: KernelArgs) -> Result<f64> {
    args.validate()?;
    Ok(ph_unchecked(args.omega, args.e1, args.e2))
}
