//! Brute-force evaluation of the frequency kernels.
//!
//! Integrates the complex propagator product directly, after mapping
//! `p0 = W tan(u)` onto `u in [-pi/2, pi/2]`. In `u` the integrand is
//!
//! ```text
//! -4 sin(u)^4 cos(u)^2 / ((i W sin(u) - e1 cos(u)) (-/+ i W sin(u) - e2 cos(u)))
//! ```
//!
//! which is bounded and smooth up to the endpoints. The interval is split at
//! `u = 0` and `u = +-atan(|e|/W)` where the propagator poles sit, and each
//! panel gets a composite Clenshaw-Curtis rule whose panel count doubles
//! until two successive levels agree.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::{Channel, KernelArgs};
use crate::error::{Error, Result};
use crate::rules::{make_rule, Rule1D};

const BASE_POINTS: usize = 17;
const MAX_LEVEL: u32 = 14;

fn integrand(channel: Channel, args: &KernelArgs, u: f64) -> Complex64 {
    let (s, c) = u.sin_cos();
    let ws = args.omega * s;
    let a = Complex64::new(-args.e1 * c, ws);
    let b = match channel {
        Channel::Pp => Complex64::new(-args.e2 * c, -ws),
        Channel::Ph => Complex64::new(-args.e2 * c, ws),
    };
    let den = a * b;
    if den == Complex64::new(0.0, 0.0) {
        // u = 0 with a vanishing energy: the s^4 numerator wins.
        return Complex64::new(0.0, 0.0);
    }
    let s2 = s * s;
    Complex64::new(-4.0 * s2 * s2 * c * c, 0.0) / den
}

fn composite(
    rule: &Rule1D,
    lo: f64,
    hi: f64,
    panels: usize,
    f: &dyn Fn(f64) -> Complex64,
) -> Complex64 {
    let h = (hi - lo) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let a = lo + k as f64 * h;
        let mid = a + 0.5 * h;
        let mut part = Complex64::new(0.0, 0.0);
        for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
            part += w * f(mid + 0.5 * h * x);
        }
        acc += part * (0.5 * h);
    }
    acc
}

/// Numerical value of the kernel for `channel`, converged to `tol`
/// (mixed absolute/relative).
pub fn kernel_oracle(channel: Channel, args: KernelArgs, tol: f64) -> Result<f64> {
    args.validate()?;
    if !(tol >= 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "oracle tolerance must be >= 1e-12, got {tol}"
        )));
    }
    let mut breaks = vec![-FRAC_PI_2, 0.0, FRAC_PI_2];
    for e in [args.e1, args.e2] {
        let u = (e.abs() / args.omega).atan();
        if u > 0.0 && u < FRAC_PI_2 {
            breaks.push(u);
            breaks.push(-u);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let rule = make_rule(BASE_POINTS)?;
    let f = |u: f64| integrand(channel, &args, u);
    let level_sum = |panels: usize| -> Complex64 {
        breaks
            .windows(2)
            .map(|w| composite(&rule, w[0], w[1], panels, &f))
            .sum()
    };

    let mut prev = level_sum(1);
    for level in 1..=MAX_LEVEL {
        let cur = level_sum(1 << level);
        let scale = cur.re.abs().max(1.0);
        if (cur.re - prev.re).abs() <= tol * scale {
            if cur.im.abs() > tol * scale {
                return Err(Error::OracleFailure(format!(
                    "imaginary part {:e} does not vanish for {args:?}",
                    cur.im
                )));
            }
            return Ok(cur.re);
        }
        prev = cur;
    }
    Err(Error::OracleFailure(format!(
        "no convergence to {tol:e} after {MAX_LEVEL} refinement levels for {args:?}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn reproduces_the_zero_energy_value() {
        let v = kernel_oracle(Channel::Pp, KernelArgs::new(1.0, 0.0, 0.0), 1e-10).unwrap();
        assert!((v + PI / 2.0).abs() < 1e-10, "{v}");
        for w in [0.1, 1.0, 10.0] {
            let v = kernel_oracle(Channel::Pp, KernelArgs::new(w, 0.0, 0.0), 1e-12).unwrap();
            assert!((v * w * w + PI / 2.0).abs() < 1e-9, "{w}: {v}");
        }
    }

    #[test]
    fn rejects_tiny_tolerance() {
        assert!(kernel_oracle(Channel::Ph, KernelArgs::new(1.0, 0.0, 0.0), 1e-13).is_err());
    }

    #[test]
    fn pp_is_invariant_under_exchange() {
        let a = kernel_oracle(Channel::Pp, KernelArgs::new(0.3, 1.1, -0.4), 1e-11).unwrap();
        let b = kernel_oracle(Channel::Pp, KernelArgs::new(0.3, -0.4, 1.1), 1e-11).unwrap();
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
    }
}
