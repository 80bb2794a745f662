//! A small heterogeneous family integrated under one global error target.
//! Effort flows to the member with the sharp peak.
//!
//! cargo run --release --example family_adaptive -- [epsilon] [workers]

use paid::{run_adaptive, AdaptiveConfig, IntegrandFamily, Rectangle};

fn main() -> paid::Result<()> {
    let mut args = std::env::args().skip(1);
    let eps: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1e-9);
    let workers: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);

    let family = IntegrandFamily::new(Rectangle::square(1.0)?)
        .with("constant", |_: f64, _: f64| 2.0)
        .with("smooth", |x: f64, y: f64| (x * y).cos())
        .with("runge", |x: f64, y: f64| {
            1.0 / ((1.0 + 25.0 * x * x) * (1.0 + 25.0 * y * y))
        })
        .with("peak", |x: f64, y: f64| {
            let (dx, dy) = (x - 0.6, y - 0.3);
            1e-3 / (1e-3 + dx * dx + dy * dy)
        });

    let cfg = AdaptiveConfig::absolute(eps, 4)
        .with_workers(workers)
        .with_max_task(4);
    let r = run_adaptive(&family, &cfg)?;

    println!(
        "global err {:.3e} < {:.1e}: {}",
        r.global_err, r.threshold, r.converged
    );
    println!(
        "{} evaluations, {} leaf tasks, {} refinements",
        r.eval_count, r.task_count, r.refinements
    );
    for (i, label) in family.labels().iter().enumerate() {
        let share = 100.0 * r.member_evals[i] as f64 / r.eval_count as f64;
        println!(
            "{label:>10}: {:+.15e}  ({share:5.1}% of evaluations)",
            r.values[i]
        );
    }
    Ok(())
}
