//! The 45- or 325-member bubble family at one scale: values of the members
//! that survive the lattice symmetries, with their form-factor names.
//!
//! cargo run --release --example bubble_family -- [omega] [pp|ph] [9|25]

use paid::frg::{build_family, BubbleSpec, Channel};
use paid::{run_adaptive, AdaptiveConfig};

fn main() -> paid::Result<()> {
    let mut args = std::env::args().skip(1);
    let omega: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let channel: Channel = args.next().map_or(Ok(Channel::Pp), |s| s.parse())?;
    let basis: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(9);

    let spec = BubbleSpec::new(channel, [1.57, 1.31], omega, basis)?;
    let family = build_family(&spec)?;
    let r = run_adaptive(
        &family,
        &AdaptiveConfig::relative(1e-6, 4).with_max_task(10),
    )?;

    let total: f64 = r.values.iter().sum();
    let scale: f64 = r.values.iter().map(|v| v.abs()).sum();
    println!(
        "{} members, sum {total:+.10e}, {} evaluations, converged {}",
        family.len(),
        r.eval_count,
        r.converged
    );
    let mut zero = 0;
    for ((m, n), v) in spec.pairs().into_iter().zip(&r.values) {
        if v.abs() <= 1e-10 * scale {
            zero += 1;
            continue;
        }
        let name = format!("{} x {}", spec.basis.describe(m), spec.basis.describe(n));
        println!("{m:>2},{n:<2} {name:<32} {v:+.10e}");
    }
    println!("{zero} members vanish to round-off");
    Ok(())
}
