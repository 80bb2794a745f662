//! The harness as a library: a short evaluation-count sweep built from a
//! config text, written as CSV to stdout.
//!
//! cargo run --release --example bench_sweep

use paid::bench::{sweep, sweep_table, BenchConfig, Command};

const CONFIG: &str = "
# two scales, one transfer momentum
lx = 1.57
ly = 1.31
omega-start = 10
omega-stop = 1
omega-points = 3
mode = both
";

fn main() -> paid::Result<()> {
    let mut cfg = BenchConfig::defaults(Command::EvalsSweep);
    cfg.apply_text(CONFIG)?;
    let records = sweep(&cfg)?;
    sweep_table(&cfg, &records).write_to(&mut std::io::stdout())?;
    for pair in records.chunks(2) {
        if let [paid, local] = pair {
            eprintln!(
                "omega {:.3e}: local / paid = {:.2}",
                paid.omega,
                local.eval_count as f64 / paid.eval_count as f64
            );
        }
    }
    Ok(())
}
