//! Evaluation counts of the global-error driver and the per-member baseline
//! on the same bubble family, under both member-target conventions.
//!
//! cargo run --release --example local_vs_global -- [omega ...]

use paid::frg::{build_family, BubbleSpec, Channel};
use paid::{run_adaptive, run_family_local_with, AdaptiveConfig, LocalTarget};

fn main() -> paid::Result<()> {
    let omegas: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|s| s.parse().ok())
        .collect();
    let omegas = if omegas.is_empty() {
        vec![10.0, 1.0, 0.1]
    } else {
        omegas
    };
    let cfg = AdaptiveConfig::relative(1e-6, 4)
        .with_max_task(10)
        .with_eval_budget(10_000_000_000);

    println!(
        "{:>10} {:>14} {:>14} {:>8} {:>14} {:>8}",
        "omega", "global", "member-rel", "ratio", "family-share", "ratio"
    );
    for omega in omegas {
        let family = build_family(&BubbleSpec::new(Channel::Pp, [1.57, 1.31], omega, 9)?)?;
        let paid = run_adaptive(&family, &cfg)?;
        let total: f64 = paid.values.iter().sum();

        let floor = total.abs() / family.len() as f64;
        let rel = run_family_local_with(
            &family,
            &cfg.with_value_floor(floor),
            LocalTarget::MemberRelative,
        )?;
        let share = run_family_local_with(
            &family,
            &cfg,
            LocalTarget::FamilyShare {
                reference_total: total,
            },
        )?;

        let ratio = |n: u64| n as f64 / paid.eval_count as f64;
        println!(
            "{omega:>10.3e} {:>14} {:>14} {:>8.2} {:>14} {:>8.2}",
            paid.eval_count,
            rel.eval_count,
            ratio(rel.eval_count),
            share.eval_count,
            ratio(share.eval_count)
        );
    }
    Ok(())
}
