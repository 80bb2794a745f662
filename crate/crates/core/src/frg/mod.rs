//! Bubble integrands of the truncated-unity fRG on the square-lattice
//! `t-t'` Hubbard model.
//!
//! For transfer momentum `l`, scale `W` and form factors `f_m`, `f_n` the
//! momentum integrand is
//!
//! ```text
//! phi_mn(p) = K(W, eps(k1(p)), eps(k2(p))) f_m(p) f_n(p)
//! ```
//!
//! over the Brillouin zone `[-pi, pi]^2`, with `K` the scale derivative of
//! the frequency-integrated propagator product. Particle-particle uses
//! `k1 = l/2 + p`, `k2 = l/2 - p`; particle-hole uses `k1 = p + l/2`,
//! `k2 = p - l/2`.

mod form_factor;
mod kernel;
mod oracle;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

pub use form_factor::{form_factor, FormFactorBasis};
pub use kernel::{kernel_ph, kernel_pp, KernelArgs};
pub use oracle::kernel_oracle;

use form_factor::Harmonic;

use crate::adaptive::IntegrandFamily;
use crate::error::{Error, Result};
use crate::rules::Rectangle;

/// Hopping amplitudes and chemical potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub t: f64,
    pub t_prime: f64,
    pub mu: f64,
}

impl Default for ModelParams {
    /// Half filling, `t = 1`, `t' = 0`, `mu = 0`.
    fn default() -> Self {
        ModelParams {
            t: 1.0,
            t_prime: 0.0,
            mu: 0.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.t == 0.0
            || ![self.t, self.t_prime, self.mu]
                .iter()
                .all(|v| v.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "model parameters need a finite, nonzero t: {self:?}"
            )));
        }
        Ok(())
    }

    /// Largest possible `|eps(k)|`.
    pub fn bandwidth_bound(&self) -> f64 {
        4.0 * self.t.abs() + 4.0 * self.t_prime.abs() + self.mu.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Pp,
    Ph,
}

impl Channel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Channel::Pp => "pp",
            Channel::Ph => "ph",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pp" => Ok(Channel::Pp),
            "ph" => Ok(Channel::Ph),
            _ => Err(Error::InvalidArgument(format!("unknown channel `{s}`"))),
        }
    }
}

/// `eps(k) = -2t (cos kx + cos ky) - 4t' cos kx cos ky - mu`.
#[inline]
pub fn dispersion(k: [f64; 2], params: &ModelParams) -> f64 {
    let cx = k[0].cos();
    let cy = k[1].cos();
    -2.0 * params.t * (cx + cy) - 4.0 * params.t_prime * cx * cy - params.mu
}

/// `theta(k0) = k0^2 / (k0^2 + W^2)`.
#[inline]
pub fn regulator(k0: f64, omega: f64) -> f64 {
    let k2 = k0 * k0;
    k2 / (k2 + omega * omega)
}

/// `G(k0, k) = theta(k0) / (i k0 - eps(k))`; exactly zero at `k0 = 0`.
pub fn propagator(k0: f64, k: [f64; 2], params: &ModelParams, omega: f64) -> Complex64 {
    let theta = regulator(k0, omega);
    if theta == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(theta, 0.0) / Complex64::new(-dispersion(k, params), k0)
}

/// Frequency kernel for either channel.
pub fn kernel(channel: Channel, args: KernelArgs) -> Result<f64> {
    match channel {
        Channel::Pp => kernel_pp(args),
        Channel::Ph => kernel_ph(args),
    }
}

/// Physics parameters that generate one bubble family.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleSpec {
    pub channel: Channel,
    /// Transfer momentum.
    pub l: [f64; 2],
    pub omega: f64,
    pub params: ModelParams,
    pub basis: FormFactorBasis,
}

impl BubbleSpec {
    pub fn new(channel: Channel, l: [f64; 2], omega: f64, basis_size: usize) -> Result<Self> {
        let spec = BubbleSpec {
            channel,
            l,
            omega,
            params: ModelParams::default(),
            basis: FormFactorBasis::new(basis_size)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_params(mut self, params: ModelParams) -> Result<Self> {
        params.validate()?;
        self.params = params;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "scale must be positive and finite, got {}",
                self.omega
            )));
        }
        if !self.l.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "transfer momentum must be finite, got {:?}",
                self.l
            )));
        }
        Ok(())
    }

    /// Number of unordered form-factor pairs `(m, n)`, `m <= n`.
    pub fn member_count(&self) -> usize {
        let s = self.basis.size();
        s * (s + 1) / 2
    }

    /// Form-factor index pairs in family order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let s = self.basis.size();
        (0..s).flat_map(|m| (m..s).map(move |n| (m, n))).collect()
    }

    /// A standalone `phi_mn`.
    pub fn integrand(&self, m: usize, n: usize) -> Result<BubbleIntegrand> {
        self.validate()?;
        let size = self.basis.size();
        if m >= size || n >= size {
            return Err(Error::InvalidArgument(format!(
                "form-factor pair ({m}, {n}) out of range for basis size {size}"
            )));
        }
        Ok(BubbleIntegrand {
            channel: self.channel,
            half_l: [0.5 * self.l[0], 0.5 * self.l[1]],
            omega: self.omega,
            params: self.params,
            fm: self.basis.factor(m),
            fn_: self.basis.factor(n),
        })
    }
}

/// `phi_mn(p)` for one bubble specification.
#[derive(Debug, Clone, Copy)]
pub struct BubbleIntegrand {
    channel: Channel,
    half_l: [f64; 2],
    omega: f64,
    params: ModelParams,
    fm: form_factor::FormFactor,
    fn_: form_factor::FormFactor,
}

impl BubbleIntegrand {
    /// The frequency kernel part only.
    #[inline]
    pub fn kernel_at(&self, px: f64, py: f64) -> f64 {
        let [hx, hy] = self.half_l;
        match self.channel {
            Channel::Pp => {
                let e1 = dispersion([hx + px, hy + py], &self.params);
                let e2 = dispersion([hx - px, hy - py], &self.params);
                kernel::pp_unchecked(self.omega, e1, e2)
            }
            Channel::Ph => {
                let e1 = dispersion([px + hx, py + hy], &self.params);
                let e2 = dispersion([px - hx, py - hy], &self.params);
                kernel::ph_unchecked(self.omega, e1, e2)
            }
        }
    }

    #[inline]
    pub fn value(&self, px: f64, py: f64) -> f64 {
        self.kernel_at(px, py) * (self.fm.eval(px, py) * self.fn_.eval(px, py))
    }
}

impl crate::rules::Integrand for BubbleIntegrand {
    #[inline]
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.value(x, y)
    }

    /// Bitwise equal to pointwise `eval`, with the trigonometry hoisted out
    /// of the inner loop.
    fn eval_grid(&self, xs: &[f64], ys: &[f64], out: &mut [f64]) {
        let [hx, hy] = self.half_l;
        let axis = |h: f64, p: f64, am: Harmonic, an: Harmonic| AxisTerms {
            c_plus: (h + p).cos(),
            c_minus: match self.channel {
                Channel::Pp => (h - p).cos(),
                Channel::Ph => (p - h).cos(),
            },
            fm: am.eval(p),
            fn_: an.eval(p),
        };
        let (fmx, fmy) = self.fm.parts();
        let (fnx, fny) = self.fn_.parts();
        let cols: Vec<AxisTerms> = ys.iter().map(|&y| axis(hy, y, fmy, fny)).collect();
        let t = self.params.t;
        let tp = self.params.t_prime;
        let mu = self.params.mu;
        let disp = |cx: f64, cy: f64| -2.0 * t * (cx + cy) - 4.0 * tp * cx * cy - mu;
        for (row, &x) in out.chunks_exact_mut(ys.len()).zip(xs) {
            let r = axis(hx, x, fmx, fnx);
            for (o, c) in row.iter_mut().zip(&cols) {
                let e1 = disp(r.c_plus, c.c_plus);
                let e2 = disp(r.c_minus, c.c_minus);
                let k = match self.channel {
                    Channel::Pp => kernel::pp_unchecked(self.omega, e1, e2),
                    Channel::Ph => kernel::ph_unchecked(self.omega, e1, e2),
                };
                *o = k * ((r.fm * c.fm) * (r.fn_ * c.fn_));
            }
        }
    }
}

struct AxisTerms {
    c_plus: f64,
    c_minus: f64,
    fm: f64,
    fn_: f64,
}

/// One member per unordered pair `(m, n)`, labelled `"m,n"`, over `[-pi, pi]^2`.
pub fn build_family(spec: &BubbleSpec) -> Result<IntegrandFamily> {
    spec.validate()?;
    let mut fam = IntegrandFamily::new(Rectangle::brillouin_zone());
    for (m, n) in spec.pairs() {
        fam.push(format!("{m},{n}"), spec.integrand(m, n)?);
    }
    Ok(fam)
}

/// Values of `phi_mn` on a `grid_size x grid_size` cell-centred grid over the
/// Brillouin zone, row-major in `px`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrandScan {
    pub grid_size: usize,
    pub points: Vec<[f64; 3]>,
}

impl IntegrandScan {
    /// `max |phi| / mean |phi|`.
    pub fn sharpness(&self) -> f64 {
        let (max, sum) = self.points.iter().fold((0.0f64, 0.0), |(mx, s), p| {
            (mx.max(p[2].abs()), s + p[2].abs())
        });
        let mean = sum / self.points.len() as f64;
        if mean == 0.0 {
            0.0
        } else {
            max / mean
        }
    }
}

pub fn scan_integrand(
    spec: &BubbleSpec,
    m: usize,
    n: usize,
    grid_size: usize,
) -> Result<IntegrandScan> {
    if grid_size < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid size {grid_size} is too small"
        )));
    }
    let phi = spec.integrand(m, n)?;
    let h = 2.0 * std::f64::consts::PI / grid_size as f64;
    let at = |i: usize| -std::f64::consts::PI + (i as f64 + 0.5) * h;
    let mut points = Vec::with_capacity(grid_size * grid_size);
    for i in 0..grid_size {
        for j in 0..grid_size {
            let (px, py) = (at(i), at(j));
            let v = phi.value(px, py);
            if !v.is_finite() {
                return Err(Error::EvaluationFailure {
                    member: None,
                    x: px,
                    y: py,
                    value: v,
                });
            }
            points.push([px, py, v]);
        }
    }
    Ok(IntegrandScan { grid_size, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn dispersion_values() {
        let hf = ModelParams::default();
        assert!((dispersion([0.0, 0.0], &hf) + 4.0).abs() < 1e-15);
        assert!(dispersion([PI, 0.0], &hf).abs() < 1e-15);
        let tp = ModelParams {
            t_prime: 0.25,
            ..hf
        };
        assert!((dispersion([PI, PI], &tp) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn regulator_values() {
        assert_eq!(regulator(0.0, 0.3), 0.0);
        assert!((regulator(0.3, 0.3) - 0.5).abs() < 1e-16);
        assert!((regulator(0.3e6, 0.3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn propagator_values() {
        let hf = ModelParams::default();
        assert_eq!(
            propagator(0.0, [0.3, 0.2], &hf, 1.0),
            Complex64::new(0.0, 0.0)
        );
        // eps(pi/2, pi/2) = 0
        let k = [PI / 2.0, PI / 2.0];
        let g = propagator(1.0, k, &hf, 1.0);
        assert!((g - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        // G(-k0) = conj(G(k0)) always; at eps = 0 that is also -G(k0).
        let gm = propagator(-1.0, k, &hf, 1.0);
        assert!((g.conj() - gm).norm() < 1e-15);
        assert!((g + gm).norm() < 1e-15);
        let k = [0.3, 1.1];
        let (g, gm) = (propagator(0.7, k, &hf, 0.2), propagator(-0.7, k, &hf, 0.2));
        assert!((g.conj() - gm).norm() < 1e-15);
    }

    #[test]
    fn family_sizes_and_labels() {
        let s9 = BubbleSpec::new(Channel::Pp, [1.57, 1.31], 1.0, 9).unwrap();
        let f = build_family(&s9).unwrap();
        assert_eq!(f.len(), 45);
        assert_eq!(f.labels()[0], "0,0");
        assert_eq!(f.labels()[44], "8,8");
        let s25 = BubbleSpec::new(Channel::Ph, [2.88, 0.26], 0.1, 25).unwrap();
        assert_eq!(build_family(&s25).unwrap().len(), 325);
    }

    #[test]
    fn spec_validation() {
        assert!(BubbleSpec::new(Channel::Pp, [0.0, 0.0], 0.0, 9).is_err());
        assert!(BubbleSpec::new(Channel::Pp, [f64::NAN, 0.0], 1.0, 9).is_err());
        assert!(BubbleSpec::new(Channel::Pp, [0.0, 0.0], 1.0, 16).is_err());
        let s = BubbleSpec::new(Channel::Pp, [0.0, 0.0], 1.0, 9).unwrap();
        assert!(s
            .with_params(ModelParams {
                t: 0.0,
                t_prime: 0.0,
                mu: 0.0
            })
            .is_err());
        let s = BubbleSpec::new(Channel::Pp, [0.0, 0.0], 1.0, 9).unwrap();
        assert!(s.integrand(9, 0).is_err());
    }

    #[test]
    fn transposed_pair_is_the_same_function() {
        let s = BubbleSpec::new(Channel::Ph, [1.57, 1.31], 0.3, 9).unwrap();
        let a = s.integrand(2, 6).unwrap();
        let b = s.integrand(6, 2).unwrap();
        for &(x, y) in &[(0.1, 0.2), (-2.0, 3.0), (1.5, -0.7)] {
            assert_eq!(a.value(x, y), b.value(x, y));
        }
    }

    #[test]
    fn grid_evaluation_matches_pointwise() {
        use crate::rules::Integrand;
        let xs = [-3.0, -0.4, 0.0, 1.2, 2.9];
        let ys = [-1.1, 0.3, 3.1];
        for ch in [Channel::Pp, Channel::Ph] {
            let s = BubbleSpec::new(ch, [2.88, 0.26], 0.05, 25)
                .unwrap()
                .with_params(ModelParams {
                    t: 1.0,
                    t_prime: -0.2,
                    mu: 0.3,
                })
                .unwrap();
            for (m, n) in [(0, 0), (3, 7), (12, 24)] {
                let phi = s.integrand(m, n).unwrap();
                let mut out = [0.0; 15];
                phi.eval_grid(&xs, &ys, &mut out);
                for (i, &x) in xs.iter().enumerate() {
                    for (j, &y) in ys.iter().enumerate() {
                        assert_eq!(out[i * 3 + j].to_bits(), phi.eval(x, y).to_bits());
                    }
                }
            }
        }
    }
}
