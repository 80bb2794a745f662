//! Self-check suites: analytic kernels against the brute-force oracle,
//! form-factor orthonormality, pair-rule exactness on polynomials and the
//! adaptive driver against uniform refinement.

use std::f64::consts::PI;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::adaptive::{run_adaptive, AdaptiveConfig, IntegrandFamily};
use crate::error::Result;
use crate::frg::{kernel, kernel_oracle, BubbleSpec, Channel, FormFactorBasis, KernelArgs};
use crate::rules::{make_pair, Integrand, QuadPairRule, Rectangle};

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest error seen, in the units of `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub first_failure: Option<String>,
}

impl SuiteReport {
    fn new(name: &'static str, tolerance: f64) -> Self {
        SuiteReport {
            name,
            cases: 0,
            failures: 0,
            worst: 0.0,
            tolerance,
            first_failure: None,
        }
    }

    fn record(&mut self, err: f64, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if err.is_nan() || err > self.worst {
            self.worst = err;
        }
        if !(err <= self.tolerance) {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }
}

/// All four suites with the default case counts: 1000 kernel cases of
/// which 50 coalescent, 200 polynomials per `N`.
pub fn verify_all(seed: u64) -> Result<VerifyReport> {
    verify_all_perturbed(seed, 0.0)
}

/// [`verify_all`] with the kernel under test scaled by `1 + perturbation`.
pub fn verify_all_perturbed(seed: u64, perturbation: f64) -> Result<VerifyReport> {
    let mut rng = StdRng::seed_from_u64(seed);
    Ok(VerifyReport {
        suites: vec![
            kernel_suite(&mut rng, 950, 50, |c, a| {
                Ok(kernel(c, a)? * (1.0 + perturbation))
            })?,
            orthonormality_suite(64)?,
            exactness_suite(&mut rng, 200)?,
            equivalence_suite()?,
        ],
    })
}

/// Random and coalescent kernel arguments compared against
/// [`kernel_oracle`] with the mixed tolerance `1e-8 max(1, |oracle|)`.
///
/// `analytic` is the kernel under test.
pub fn kernel_suite<R: Rng, K>(
    rng: &mut R,
    random: usize,
    coalescent: usize,
    analytic: K,
) -> Result<SuiteReport>
where
    K: Fn(Channel, KernelArgs) -> Result<f64>,
{
    let mut rep = SuiteReport::new("kernel-oracle", 1e-8);
    let mut cases = Vec::with_capacity(random + coalescent);
    let draw_omega = |rng: &mut R| 10f64.powf(rng.gen_range(-3.0..=1.0));
    for i in 0..random {
        let ch = if i % 2 == 0 { Channel::Pp } else { Channel::Ph };
        let w = draw_omega(rng);
        cases.push((
            ch,
            KernelArgs::new(w, rng.gen_range(-4.5..=4.5), rng.gen_range(-4.5..=4.5)),
        ));
    }
    for i in 0..coalescent {
        let w = draw_omega(rng);
        let e = rng.gen_range(-4.5..=4.5);
        let d = rng.gen_range(-1e-9..=1e-9);
        cases.push(match i % 3 {
            0 => (Channel::Ph, KernelArgs::new(w, e, e + d)),
            1 => (Channel::Pp, KernelArgs::new(w, e, e + d)),
            _ => (Channel::Pp, KernelArgs::new(w, e, -e)),
        });
    }
    for (ch, args) in cases {
        let exact = kernel_oracle(ch, args, 1e-11)?;
        let got = analytic(ch, args)?;
        let err = (got - exact).abs() / exact.abs().max(1.0);
        rep.record(err, || {
            format!("{ch} {args:?}: analytic {got:e}, oracle {exact:e}")
        });
    }
    Ok(rep)
}

/// Gram matrix of the 25-function basis on a `grid x grid` periodic grid,
/// which integrates these trigonometric products exactly.
pub fn orthonormality_suite(grid: usize) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("orthonormality", 1e-10);
    let basis = FormFactorBasis::new(25)?;
    let h = 2.0 * PI / grid as f64;
    let pts: Vec<[f64; 2]> = (0..grid * grid)
        .map(|k| [-PI + (k / grid) as f64 * h, -PI + (k % grid) as f64 * h])
        .collect();
    let vals: Vec<Vec<f64>> = (0..basis.size())
        .map(|a| {
            pts.iter()
                .map(|&p| basis.eval(a, p))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    for a in 0..basis.size() {
        for b in a..basis.size() {
            let g: f64 = vals[a]
                .iter()
                .zip(&vals[b])
                .map(|(x, y)| x * y)
                .sum::<f64>()
                * h
                * h;
            let want = if a == b { 1.0 } else { 0.0 };
            rep.record((g - want).abs(), || format!("<f{a}, f{b}> = {g:e}"));
        }
    }
    Ok(rep)
}

/// Per-axis degree `<= N` polynomials for `N` in 2, 4, 6 on random
/// rectangles: both rules exact to `1e-12` relative.
pub fn exactness_suite<R: Rng>(rng: &mut R, per_n: usize) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("polynomial-exactness", 1e-12);
    for n in [2, 4, 6] {
        let pair = make_pair(n)?;
        for _ in 0..per_n {
            let coef: Vec<f64> = (0..(n + 1) * (n + 1))
                .map(|_| rng.gen_range(-1.0..=1.0))
                .collect();
            let x_lo = rng.gen_range(-3.0..=3.0);
            let y_lo = rng.gen_range(-3.0..=3.0);
            let rect = Rectangle::new(
                x_lo,
                x_lo + rng.gen_range(0.1..=3.0),
                y_lo,
                y_lo + rng.gen_range(0.1..=3.0),
            )?;
            let poly = |x: f64, y: f64| {
                let mut s = 0.0;
                for i in (0..=n).rev() {
                    let mut row = 0.0;
                    for j in (0..=n).rev() {
                        row = row * y + coef[i * (n + 1) + j];
                    }
                    s = s * x + row;
                }
                s
            };
            let mom = |a: f64, b: f64, k: usize| {
                (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (k + 1) as f64
            };
            let amom = |a: f64, b: f64, k: usize| {
                let f = |t: f64| t.abs().powi(k as i32 + 1) * t.signum() / (k + 1) as f64;
                f(b) - f(a)
            };
            let (mut exact, mut scale) = (0.0, 0.0);
            for i in 0..=n {
                for j in 0..=n {
                    let c = coef[i * (n + 1) + j];
                    exact += c * mom(rect.x_lo, rect.x_hi, i) * mom(rect.y_lo, rect.y_hi, j);
                    scale +=
                        c.abs() * amom(rect.x_lo, rect.x_hi, i) * amom(rect.y_lo, rect.y_hi, j);
                }
            }
            let r = pair.integrate(&poly, &rect)?;
            let err = (r.q_fine - exact).abs().max(r.err) / scale;
            rep.record(err, || {
                format!(
                    "N={n} on {rect}: fine {:e}, exact {exact:e}, pair err {:e}",
                    r.q_fine, r.err
                )
            });
        }
    }
    Ok(rep)
}

/// Fine-rule sum over a uniform `2^depth x 2^depth` split of `domain`.
pub fn uniform_refinement<F: Integrand + ?Sized>(
    f: &F,
    domain: Rectangle,
    pair: &QuadPairRule,
    depth: u32,
) -> Result<f64> {
    let k = 1usize << depth;
    let hx = domain.width() / k as f64;
    let hy = domain.height() / k as f64;
    let mut total = 0.0;
    for i in 0..k {
        let mut row = 0.0;
        for j in 0..k {
            let x_lo = domain.x_lo + i as f64 * hx;
            let y_lo = domain.y_lo + j as f64 * hy;
            let cell = Rectangle::new(x_lo, x_lo + hx, y_lo, y_lo + hy)?;
            row += pair.integrate(f, &cell)?.q_fine;
        }
        total += row;
    }
    Ok(total)
}

/// The mixed corpus used for driver equivalence checks: six families with
/// their domains.
pub fn equivalence_corpus() -> Result<Vec<(&'static str, IntegrandFamily)>> {
    let sq = Rectangle::square(1.0)?;
    let constants = IntegrandFamily::new(Rectangle::brillouin_zone())
        .with("one", |_: f64, _: f64| 1.0)
        .with("minus-half", |_: f64, _: f64| -0.5)
        .with("big", |_: f64, _: f64| 1e3);
    let polys = IntegrandFamily::new(sq)
        .with("x2+y2", |x: f64, y: f64| x * x + y * y)
        .with("x3y", |x: f64, y: f64| x * x * x * y + 0.25)
        .with("deg8", |x: f64, y: f64| x.powi(8) - 2.0 * y.powi(6) * x * x);
    let runge = IntegrandFamily::new(sq).with("runge", |x: f64, y: f64| {
        1.0 / ((1.0 + 25.0 * x * x) * (1.0 + 25.0 * y * y))
    });
    let gauss = IntegrandFamily::new(sq).with("gauss", |x: f64, y: f64| {
        let (dx, dy) = (x - 0.37, y + 0.21);
        (-(dx * dx + dy * dy) / (2.0 * 0.05 * 0.05)).exp()
    });
    let bubble = |omega: f64| -> Result<IntegrandFamily> {
        let spec = BubbleSpec::new(Channel::Pp, [1.57, 1.31], omega, 9)?;
        Ok(IntegrandFamily::new(Rectangle::brillouin_zone()).with("0,0", spec.integrand(0, 0)?))
    };
    Ok(vec![
        ("constants", constants),
        ("polynomials", polys),
        ("runge", runge),
        ("gaussian", gauss),
        ("pp00-omega0.5", bubble(0.5)?),
        ("pp00-omega0.05", bubble(0.05)?),
    ])
}

/// Driver at `1e-8` absolute against depth-8 uniform refinement, per
/// member, within `max(10 eps, 1e-9 |value|)`.
///
/// The reference applies a 33-point rule per axis in each cell; the bubble
/// integrands have kinks on the Fermi surface and nine points per cell leave
/// errors near `1e-6` at the lower scale.
pub fn equivalence_suite() -> Result<SuiteReport> {
    let eps = 1e-8;
    let mut rep = SuiteReport::new("oracle-equivalence", 1.0);
    let cfg = AdaptiveConfig::absolute(eps, 4).with_max_task(4);
    let pair = make_pair(16)?;
    for (name, fam) in equivalence_corpus()? {
        let r = run_adaptive(&fam, &cfg)?;
        for i in 0..fam.len() {
            let reference = uniform_refinement(fam.member(i), fam.domain(), &pair, 8)?;
            let tol = (10.0 * eps).max(1e-9 * reference.abs());
            let diff = (r.values[i] - reference).abs();
            rep.record(diff / tol, || {
                format!(
                    "{name}/{}: adaptive {:e}, uniform {reference:e}",
                    fam.labels()[i],
                    r.values[i]
                )
            });
        }
    }
    Ok(rep)
}
