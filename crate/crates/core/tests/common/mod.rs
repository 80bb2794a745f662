//! Reference computations shared by the integration tests. Nothing here
//! calls into the crate's quadrature code.

#![allow(dead_code)]

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64;
use paid::{Integrand, IntegrandFamily, Rectangle};
use proptest::prelude::*;
use rustfft::FftPlanner;

/// Clenshaw-Curtis weights for `n + 1` points via Waldvogel's FFT recipe.
pub fn waldvogel_weights(point_count: usize) -> Vec<f64> {
    let n = point_count - 1;
    if n == 1 {
        return vec![1.0, 1.0];
    }
    let odd: Vec<f64> = (1..n).step_by(2).map(|k| k as f64).collect();
    let l = odd.len();
    let m = n - l;
    let mut v0: Vec<f64> = odd.iter().map(|&k| 2.0 / k / (k - 2.0)).collect();
    v0.push(1.0 / odd[l - 1]);
    v0.extend(std::iter::repeat(0.0).take(m));
    let mut v2: Vec<f64> = (0..n).map(|i| -v0[i] - v0[n - i]).collect();
    let mut g0 = vec![-1.0; n];
    g0[l] += n as f64;
    g0[m] += n as f64;
    let scale = (n * n) as f64 - 1.0 + (n % 2) as f64;
    for (v, g) in v2.iter_mut().zip(&g0) {
        *v += g / scale;
    }
    let mut buf: Vec<Complex64> = v2.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let mut w: Vec<f64> = buf.iter().map(|c| c.re / n as f64).collect();
    w.push(w[0]);
    w
}

/// `sum c[i][j] x^i y^j`.
#[derive(Debug, Clone)]
pub struct Poly {
    pub coeffs: Vec<Vec<f64>>,
}

impl Poly {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut s = 0.0;
        let mut xi = 1.0;
        for row in &self.coeffs {
            let mut yj = 1.0;
            for c in row {
                s += c * xi * yj;
                yj *= y;
            }
            xi *= x;
        }
        s
    }

    /// Exact integral over `r` from the antiderivative.
    pub fn integral(&self, r: &Rectangle) -> f64 {
        let mono = |k: usize, a: f64, b: f64| (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (k + 1) as f64;
        let mut s = 0.0;
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                s += c * mono(i, r.x_lo, r.x_hi) * mono(j, r.y_lo, r.y_hi);
            }
        }
        s
    }

    /// Integral of `sum |c| |x|^i |y|^j`, the scale against which cancellation is judged.
    pub fn abs_scale(&self, r: &Rectangle) -> f64 {
        let amono = |k: usize, a: f64, b: f64| {
            let f = |t: f64| t.abs().powi(k as i32 + 1) * t.signum() / (k + 1) as f64;
            f(b) - f(a)
        };
        let mut s = 0.0;
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                s += c.abs() * amono(i, r.x_lo, r.x_hi) * amono(j, r.y_lo, r.y_hi);
            }
        }
        s
    }
}

pub fn poly_strategy(max_degree: usize) -> impl Strategy<Value = Poly> {
    (0..=max_degree, 0..=max_degree).prop_flat_map(|(dx, dy)| {
        prop::collection::vec(prop::collection::vec(-3.0..3.0f64, dy + 1), dx + 1)
            .prop_map(|coeffs| Poly { coeffs })
    })
}

pub fn rect_strategy() -> impl Strategy<Value = Rectangle> {
    (-3.0..3.0f64, 0.01..4.0f64, -3.0..3.0f64, 0.01..4.0f64)
        .prop_map(|(x, w, y, h)| Rectangle::new(x, x + w, y, y + h).unwrap())
}

/// One synthetic family member.
#[derive(Debug, Clone, Copy)]
pub enum Shape {
    Gaussian { cx: f64, cy: f64, width: f64, height: f64 },
    Lorentz { cx: f64, cy: f64, gamma: f64 },
    Wave { kx: f64, ky: f64, phase: f64 },
    Quadratic { a: f64, b: f64, c: f64 },
}

impl Shape {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            Shape::Gaussian { cx, cy, width, height } => {
                height * (-((x - cx).powi(2) + (y - cy).powi(2)) / (width * width)).exp()
            }
            Shape::Lorentz { cx, cy, gamma } => gamma / (gamma + (x - cx).powi(2) + (y - cy).powi(2)),
            Shape::Wave { kx, ky, phase } => (kx * x + ky * y + phase).cos(),
            Shape::Quadratic { a, b, c } => a * x * x + b * x * y + c * y * y,
        }
    }
}

pub fn shape_strategy() -> impl Strategy<Value = Shape> {
    prop_oneof![
        (-0.9..0.9f64, -0.9..0.9f64, 0.08..0.6f64, 0.5..2.0f64)
            .prop_map(|(cx, cy, width, height)| Shape::Gaussian { cx, cy, width, height }),
        (-0.9..0.9f64, -0.9..0.9f64, 0.005..0.2f64).prop_map(|(cx, cy, gamma)| Shape::Lorentz { cx, cy, gamma }),
        (0.0..6.0f64, 0.0..6.0f64, 0.0..3.0f64).prop_map(|(kx, ky, phase)| Shape::Wave { kx, ky, phase }),
        (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b, c)| Shape::Quadratic { a, b, c }),
    ]
}

pub fn family_strategy(max_members: usize) -> impl Strategy<Value = Vec<Shape>> {
    prop::collection::vec(shape_strategy(), 1..=max_members)
}

/// Members on `[-1, 1]^2`.
pub fn family_of(shapes: &[Shape]) -> IntegrandFamily {
    let mut fam = IntegrandFamily::new(Rectangle::square(1.0).unwrap());
    for (i, &s) in shapes.iter().enumerate() {
        fam.push(format!("s{i}"), move |x: f64, y: f64| s.eval(x, y));
    }
    fam
}

/// Counts every pointwise call; grid calls go through the pointwise default.
/// Clones share one counter.
#[derive(Clone)]
pub struct Counting<F> {
    pub f: F,
    pub calls: Arc<AtomicU64>,
}

impl<F> Counting<F> {
    pub fn new(f: F) -> Self {
        Counting { f, calls: Arc::new(AtomicU64::new(0)) }
    }

    pub fn count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl<F: Fn(f64, f64) -> f64 + Sync> Integrand for Counting<F> {
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        (self.f)(x, y)
    }
}

const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Uniform bisection to `depth` levels (`4^depth` cells) with a 5x5
/// Gauss-Legendre product rule per cell.
pub fn uniform_reference(f: impl Fn(f64, f64) -> f64, r: &Rectangle, depth: u32) -> f64 {
    let k = 1usize << depth;
    let hx = r.width() / k as f64;
    let hy = r.height() / k as f64;
    let mut total = 0.0;
    for i in 0..k {
        let cx = r.x_lo + (i as f64 + 0.5) * hx;
        let mut col = 0.0;
        for j in 0..k {
            let cy = r.y_lo + (j as f64 + 0.5) * hy;
            let mut s = 0.0;
            for (u, wu) in GL5 {
                for (v, wv) in GL5 {
                    s += wu * wv * f(cx + 0.5 * hx * u, cy + 0.5 * hy * v);
                }
            }
            col += s;
        }
        total += col;
    }
    total * 0.25 * hx * hy
}

/// [`uniform_reference`] with an `order`-point Gauss-Legendre rule per axis.
pub fn uniform_reference_gl(f: impl Fn(f64, f64) -> f64, r: &Rectangle, depth: u32, order: usize) -> f64 {
    let gl = gauss_legendre(order);
    let k = 1usize << depth;
    let hx = r.width() / k as f64;
    let hy = r.height() / k as f64;
    let mut total = 0.0;
    for i in 0..k {
        let cx = r.x_lo + (i as f64 + 0.5) * hx;
        let mut col = 0.0;
        for j in 0..k {
            let cy = r.y_lo + (j as f64 + 0.5) * hy;
            let mut s = 0.0;
            for &(u, wu) in &gl {
                for &(v, wv) in &gl {
                    s += wu * wv * f(cx + 0.5 * hx * u, cy + 0.5 * hy * v);
                }
            }
            col += s;
        }
        total += col;
    }
    total * 0.25 * hx * hy
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// The frequency integral of a bubble kernel, evaluated directly.
///
/// `pp`: `int dp0 (-4 W p0^4 / (p0^2 + W^2)^3) / ((i p0 - e1)(-i p0 - e2))`,
/// `ph`: the same with `(i p0 - e2)` in the second factor. The even part is
/// integrated over `p0 >= 0` after `p0 = W tan u`, on panels whose edges are
/// geometric in `p0` between `1e-4` of the smallest and `1e4` of the largest
/// of `W, |e1|, |e2|`. Each panel gets a 20-point Gauss-Legendre rule; the
/// result is checked against the same sum with every panel halved.
pub fn frequency_integral(pp: bool, omega: f64, e1: f64, e2: f64) -> f64 {
    let i = Complex64::i();
    let h = |p: f64| {
        let reg = -4.0 * omega * p.powi(4) / (p * p + omega * omega).powi(3);
        let den = if pp { (i * p - e1) * (-i * p - e2) } else { (i * p - e1) * (i * p - e2) };
        (reg / den).re
    };
    let f = |u: f64| {
        let t = u.tan();
        let p = omega * t;
        (h(p) + h(-p)) * omega * (1.0 + t * t)
    };
    let scales: Vec<f64> = [omega, e1.abs(), e2.abs()].into_iter().filter(|&s| s > 0.0).collect();
    let lo = scales.iter().cloned().fold(f64::INFINITY, f64::min) * 1e-4;
    let hi = scales.iter().cloned().fold(0.0, f64::max) * 1e4;
    let mut edges = vec![0.0];
    let mut p = lo;
    while p < hi {
        edges.push((p / omega).atan());
        p *= 1.5;
    }
    edges.push(std::f64::consts::FRAC_PI_2);
    let gl = gauss_legendre(20);
    let panel = |a: f64, b: f64| {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        r * gl.iter().map(|&(x, w)| w * f(c + r * x)).sum::<f64>()
    };
    let coarse: f64 = edges.windows(2).map(|w| panel(w[0], w[1])).sum();
    let fine: f64 = edges
        .windows(2)
        .map(|w| {
            let m = 0.5 * (w[0] + w[1]);
            panel(w[0], m) + panel(m, w[1])
        })
        .sum();
    assert!(
        (coarse - fine).abs() <= 1e-12 * fine.abs().max(1.0),
        "frequency integral did not settle: {coarse:e} vs {fine:e}"
    );
    fine
}
