//! Serial reference against the threaded driver, with the commit trace of
//! the threaded run: refinements committed after the coordinator raised the
//! done flag are the bounded excess.
//!
//! cargo run --release --example refinement_trace -- [workers] [max_task]

use paid::adaptive::run_adaptive_traced;
use paid::{serial_reference, AdaptiveConfig, IntegrandFamily, Rectangle};

fn main() -> paid::Result<()> {
    let mut args = std::env::args().skip(1);
    let workers: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let max_task: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);

    let mut family = IntegrandFamily::new(Rectangle::square(1.0)?);
    for k in 1..=6 {
        let a = 0.02 * k as f64;
        family.push(format!("lorentz{k}"), move |x: f64, y: f64| {
            a / (a + x * x + (y - 0.2).powi(2))
        });
    }
    let cfg = AdaptiveConfig::relative(1e-8, 4).with_max_task(max_task);

    let serial = serial_reference(&family, &cfg)?;
    let (par, trace) = run_adaptive_traced(&family, &cfg.with_workers(workers))?;

    println!(
        "serial:   {} refinements, {} evaluations",
        serial.refinements, serial.eval_count
    );
    println!(
        "threaded: {} refinements, {} evaluations",
        par.refinements, par.eval_count
    );
    println!(
        "excess after done: {} (bound workers * max_task = {})",
        trace.excess(),
        workers * max_task
    );
    let per_worker = (0..workers)
        .map(|w| trace.refinements.iter().filter(|r| r.worker == w).count())
        .collect::<Vec<_>>();
    println!("refinements per worker: {per_worker:?}");
    let dev = serial
        .values
        .iter()
        .zip(&par.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!(
        "largest member deviation {dev:.2e}, 10 x threshold {:.2e}",
        10.0 * serial.threshold
    );
    Ok(())
}
