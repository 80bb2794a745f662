//! Clenshaw-Curtis rules on `[-1, 1]`, the nested `N`/`2N` pair and its
//! tensor-product evaluation on axis-aligned rectangles.
//!
//! The fine rule of a pair has `2N + 1` points and contains the `N + 1`
//! coarse points at its even indices, so one sweep over the fine grid yields
//! both quadratures and the error estimate `|Q_N - Q_2N|`.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// A scalar function of two variables.
pub trait Integrand: Sync {
    fn eval(&self, x: f64, y: f64) -> f64;

    /// Evaluate on the tensor grid `xs x ys`, row-major in `x`:
    /// `out[i * ys.len() + j] = f(xs[i], ys[j])`.
    ///
    /// Override when per-row and per-column work can be shared.
    fn eval_grid(&self, xs: &[f64], ys: &[f64], out: &mut [f64]) {
        let ny = ys.len();
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in ys.iter().enumerate() {
                out[i * ny + j] = self.eval(x, y);
            }
        }
    }
}

impl<F> Integrand for F
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    #[inline]
    fn eval(&self, x: f64, y: f64) -> f64 {
        self(x, y)
    }
}

/// One-dimensional Clenshaw-Curtis rule with nodes `cos(j pi / (n - 1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1D {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule1D {
    pub fn point_count(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes in descending order, from `+1` to `-1`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Apply the rule to `f` over `[-1, 1]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Build the Clenshaw-Curtis rule with `point_count` points.
///
/// Weights use the closed cosine-sum form
/// `w_j = c_j / n * (1 - sum_k b_k cos(2 k theta_j) / (4k^2 - 1))`.
/// Nodes are mirrored so that `x_{n-j} = -x_j` holds bitwise.
pub fn make_rule(point_count: usize) -> Result<Rule1D> {
    if point_count < 2 {
        return Err(Error::InvalidArgument(format!(
            "a Clenshaw-Curtis rule needs at least 2 points, got {point_count}"
        )));
    }
    let n = point_count - 1;
    let angle = |j: usize| PI * (j as f64 / n as f64);

    let mut nodes = vec![0.0; point_count];
    for j in 0..=n / 2 {
        let x = if 2 * j == n { 0.0 } else { angle(j).cos() };
        nodes[j] = x;
        nodes[n - j] = -x;
    }

    let mut weights = vec![0.0; point_count];
    for j in 0..=n / 2 {
        let theta = angle(j);
        let mut s = 1.0;
        for k in 1..=n / 2 {
            let b = if 2 * k == n { 1.0 } else { 2.0 };
            let kf = k as f64;
            s -= b * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
        }
        let c = if j == 0 { 1.0 } else { 2.0 };
        let w = c * s / n as f64;
        weights[j] = w;
        weights[n - j] = w;
    }
    Ok(Rule1D { nodes, weights })
}

/// Closed axis-aligned rectangle `[x_lo, x_hi] x [y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Rectangle {
    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        let all_finite = [x_lo, x_hi, y_lo, y_hi].iter().all(|v| v.is_finite());
        if !all_finite || !(x_lo < x_hi) || !(y_lo < y_hi) {
            return Err(Error::InvalidArgument(format!(
                "rectangle [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}] is empty or not finite"
            )));
        }
        Ok(Rectangle {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        })
    }

    /// `[-a, a]^2`.
    pub fn square(half_side: f64) -> Result<Self> {
        Self::new(-half_side, half_side, -half_side, half_side)
    }

    /// The square Brillouin zone `[-pi, pi]^2`.
    pub fn brillouin_zone() -> Self {
        Rectangle {
            x_lo: -PI,
            x_hi: PI,
            y_lo: -PI,
            y_hi: PI,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> f64 {
        self.y_hi - self.y_lo
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn min_side(&self) -> f64 {
        self.width().min(self.height())
    }

    pub fn contains(&self, other: &Rectangle) -> bool {
        other.x_lo >= self.x_lo
            && other.x_hi <= self.x_hi
            && other.y_lo >= self.y_lo
            && other.y_hi <= self.y_hi
    }

    /// Bisect once along each axis. Order: lower-left, lower-right,
    /// upper-left, upper-right.
    pub fn quadrants(&self) -> [Rectangle; 4] {
        let xm = 0.5 * (self.x_lo + self.x_hi);
        let ym = 0.5 * (self.y_lo + self.y_hi);
        let r = |x_lo, x_hi, y_lo, y_hi| Rectangle {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        };
        [
            r(self.x_lo, xm, self.y_lo, ym),
            r(xm, self.x_hi, self.y_lo, ym),
            r(self.x_lo, xm, ym, self.y_hi),
            r(xm, self.x_hi, ym, self.y_hi),
        ]
    }
}

impl fmt::Display for Rectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}] x [{}, {}]",
            self.x_lo, self.x_hi, self.y_lo, self.y_hi
        )
    }
}

/// Nested pair: the coarse rule has `N + 1` points, the fine one `2N + 1`.
#[derive(Debug, Clone)]
pub struct QuadPairRule {
    n: usize,
    coarse: Rule1D,
    fine: Rule1D,
}

/// Output of one pair evaluation on a rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairResult {
    pub q_coarse: f64,
    pub q_fine: f64,
    pub err: f64,
    pub eval_count: u64,
}

pub fn make_pair(n: usize) -> Result<QuadPairRule> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "the pair parameter N must be even and >= 2, got {n}"
        )));
    }
    Ok(QuadPairRule {
        n,
        coarse: make_rule(n + 1)?,
        fine: make_rule(2 * n + 1)?,
    })
}

impl QuadPairRule {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coarse(&self) -> &Rule1D {
        &self.coarse
    }

    pub fn fine(&self) -> &Rule1D {
        &self.fine
    }

    /// Distinct integrand evaluations per rectangle, `(2N + 1)^2`.
    pub fn evals_per_rect(&self) -> u64 {
        let m = self.fine.point_count() as u64;
        m * m
    }

    /// Tensor-product coarse and fine quadratures of `f` over `rect`.
    ///
    /// Every fine-grid point is evaluated exactly once; the coarse rule reads
    /// the even-indexed rows and columns of the same grid.
    pub fn integrate<F: Integrand + ?Sized>(&self, f: &F, rect: &Rectangle) -> Result<PairResult> {
        let hx = 0.5 * rect.width();
        let hy = 0.5 * rect.height();
        let cx = 0.5 * (rect.x_lo + rect.x_hi);
        let cy = 0.5 * (rect.y_lo + rect.y_hi);
        let t = self.fine.nodes();
        let wf = self.fine.weights();
        let wc = self.coarse.weights();
        let m = t.len();

        let xs: Vec<f64> = t.iter().map(|&ti| cx + hx * ti).collect();
        let ys: Vec<f64> = t.iter().map(|&tj| cy + hy * tj).collect();
        let mut vals = vec![0.0; m * m];
        f.eval_grid(&xs, &ys, &mut vals);

        let mut q_fine = 0.0;
        let mut q_coarse = 0.0;
        for (i, row) in vals.chunks_exact(m).enumerate() {
            let mut row_fine = 0.0;
            let mut row_coarse = 0.0;
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::EvaluationFailure {
                        member: None,
                        x: xs[i],
                        y: ys[j],
                        value: v,
                    });
                }
                row_fine += wf[j] * v;
                if j % 2 == 0 {
                    row_coarse += wc[j / 2] * v;
                }
            }
            q_fine += wf[i] * row_fine;
            if i % 2 == 0 {
                q_coarse += wc[i / 2] * row_coarse;
            }
        }
        let jac = hx * hy;
        let q_coarse = jac * q_coarse;
        let q_fine = jac * q_fine;
        Ok(PairResult {
            q_coarse,
            q_fine,
            err: (q_coarse - q_fine).abs(),
            eval_count: self.evals_per_rect(),
        })
    }
}

/// Free-function form of [`QuadPairRule::integrate`].
pub fn integrate_pair<F: Integrand + ?Sized>(
    f: &F,
    rect: &Rectangle,
    pair: &QuadPairRule,
) -> Result<PairResult> {
    pair.integrate(f, rect)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_and_three_point_rules() {
        let r2 = make_rule(2).unwrap();
        assert_eq!(r2.nodes(), &[1.0, -1.0]);
        assert_eq!(r2.weights(), &[1.0, 1.0]);

        let r3 = make_rule(3).unwrap();
        assert_eq!(r3.nodes(), &[1.0, 0.0, -1.0]);
        for (w, e) in r3.weights().iter().zip([1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_short_rules() {
        assert!(matches!(make_rule(1), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_rule(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn weights_sum_to_two_and_monomials_are_exact() {
        for n in 2..=33 {
            let r = make_rule(n).unwrap();
            let s: f64 = r.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n}: {s}");
            for d in 0..n {
                let q = r.integrate(|x| x.powi(d as i32));
                let exact = if d % 2 == 1 {
                    0.0
                } else {
                    2.0 / (d as f64 + 1.0)
                };
                assert!((q - exact).abs() < 1e-13, "n={n} d={d}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn nodes_follow_cosine_formula() {
        for n in [2usize, 5, 9, 13, 25] {
            let r = make_rule(n).unwrap();
            for (j, &x) in r.nodes().iter().enumerate() {
                let e = (j as f64 * PI / (n - 1) as f64).cos();
                assert!((x - e).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn pair_sizes_and_nesting() {
        for (n, coarse, fine, evals) in [(2, 3, 5, 25), (4, 5, 9, 81), (6, 7, 13, 169)] {
            let p = make_pair(n).unwrap();
            assert_eq!(p.coarse().point_count(), coarse);
            assert_eq!(p.fine().point_count(), fine);
            assert_eq!(p.evals_per_rect(), evals);
            for (j, &x) in p.coarse().nodes().iter().enumerate() {
                assert_eq!(x.to_bits(), p.fine().nodes()[2 * j].to_bits());
            }
        }
        let p2 = make_pair(2).unwrap();
        let h = 0.5f64.sqrt();
        let expect = [1.0, h, 0.0, -h, -1.0];
        for (x, e) in p2.fine().nodes().iter().zip(expect) {
            assert!((x - e).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_pair_parameter() {
        for n in [0, 1, 3, 7] {
            assert!(matches!(make_pair(n), Err(Error::InvalidArgument(_))));
        }
    }

    #[test]
    fn rectangle_validation_and_quadrants() {
        assert!(Rectangle::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(Rectangle::new(0.0, 1.0, 2.0, 1.0).is_err());
        assert!(Rectangle::new(0.0, f64::INFINITY, 0.0, 1.0).is_err());
        assert!(Rectangle::new(f64::NAN, 1.0, 0.0, 1.0).is_err());

        let r = Rectangle::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let q = r.quadrants();
        let expect = [
            (0.0, 0.5, 0.0, 0.5),
            (0.5, 1.0, 0.0, 0.5),
            (0.0, 0.5, 0.5, 1.0),
            (0.5, 1.0, 0.5, 1.0),
        ];
        for (c, e) in q.iter().zip(expect) {
            assert_eq!((c.x_lo, c.x_hi, c.y_lo, c.y_hi), e);
            assert!(r.contains(c));
        }
    }

    #[test]
    fn pair_examples() {
        let p4 = make_pair(4).unwrap();
        let bz = Rectangle::brillouin_zone();
        let r = p4.integrate(&|_: f64, _: f64| 1.0, &bz).unwrap();
        let four_pi2 = 4.0 * PI * PI;
        assert!((r.q_coarse - four_pi2).abs() < 1e-12);
        assert!((r.q_fine - four_pi2).abs() < 1e-12);
        assert!(r.err < 1e-12);
        assert_eq!(r.eval_count, 81);

        let sq = Rectangle::square(1.0).unwrap();
        let r = p4.integrate(&|x: f64, y: f64| x * x * y * y, &sq).unwrap();
        assert!((r.q_coarse - 4.0 / 9.0).abs() < 1e-15);
        assert!((r.q_fine - 4.0 / 9.0).abs() < 1e-15);

        let runge = |x: f64, _: f64| 1.0 / (1.0 + 25.0 * x * x);
        let r = p4.integrate(&runge, &sq).unwrap();
        let exact = 2.0 * 0.4 * 5f64.atan();
        assert!((r.q_fine - exact).abs() < 0.2);
        assert!(r.err > 0.0);
    }

    #[test]
    fn non_finite_values_are_reported_with_the_point() {
        let p = make_pair(2).unwrap();
        let sq = Rectangle::square(1.0).unwrap();
        let f = |x: f64, y: f64| if x == 0.0 && y == 0.0 { f64::NAN } else { 1.0 };
        match p.integrate(&f, &sq) {
            Err(Error::EvaluationFailure { x, y, member, .. }) => {
                assert_eq!((x, y, member), (0.0, 0.0, None));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
