//! Nested Clenshaw-Curtis pair on one rectangle: coarse and fine values and
//! the error estimate `|Q_N - Q_2N|`.
//!
//! cargo run --example pair_rule -- [N]

use paid::{make_pair, make_rule, Rectangle};

fn main() -> paid::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .map_or(Ok(4), |s| s.parse())
        .unwrap_or(4);
    let pair = make_pair(n)?;

    let rule = make_rule(n + 1)?;
    println!("{}-point rule on [-1, 1]", rule.point_count());
    for (x, w) in rule.nodes().iter().zip(rule.weights()) {
        println!("  x = {x:+.16}  w = {w:.16}");
    }

    let rect = Rectangle::new(-1.0, 2.0, 0.0, 1.5)?;
    let cases: [(&str, fn(f64, f64) -> f64, f64); 3] = [
        ("x^2 y^2", |x, y| x * x * y * y, 3.0 * 1.125),
        (
            "exp(x + y)",
            |x, y| (x + y).exp(),
            (2f64.exp() - (-1f64).exp()) * (1.5f64.exp() - 1.0),
        ),
        (
            "1 / (1 + 25 x^2)",
            |x, _| 1.0 / (1.0 + 25.0 * x * x),
            1.5 * 0.2 * (10f64.atan() + 5f64.atan()),
        ),
    ];
    println!(
        "\nN = {n}, {} evaluations per rectangle, on {rect}",
        pair.evals_per_rect()
    );
    for (name, f, exact) in cases {
        let r = pair.integrate(&f, &rect)?;
        println!(
            "{name:>18}: Q_N = {:+.12e}  Q_2N = {:+.12e}  estimate = {:.2e}  true error of Q_2N = {:.2e}",
            r.q_coarse,
            r.q_fine,
            r.err,
            (r.q_fine - exact).abs()
        );
    }
    Ok(())
}
