//! Sharpness `max|phi| / mean|phi|` of one bubble integrand as the scale
//! drops; optionally writes the last grid as CSV.
//!
//! cargo run --release --example integrand_scan -- [grid] [out.csv]

use paid::bench::{format_float, BenchConfig, Command};
use paid::frg::{scan_integrand, BubbleSpec, Channel};

fn main() -> paid::Result<()> {
    let mut args = std::env::args().skip(1);
    let grid: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(256);
    let out = args.next();

    let mut last = None;
    for omega in [1.0, 0.5, 0.1, 0.05] {
        let spec = BubbleSpec::new(Channel::Pp, [3.14, 0.78], omega, 9)?;
        let s = scan_integrand(&spec, 0, 0, grid)?;
        println!(
            "omega = {omega:<5} sharpness = {}",
            format_float(s.sharpness())
        );
        last = Some((omega, s));
    }

    if let (Some(path), Some((omega, s))) = (out, last) {
        let mut cfg = BenchConfig::defaults(Command::Scan);
        cfg.set("omega-start", &omega.to_string())?;
        cfg.set("grid-size", &grid.to_string())?;
        cfg.set("out", &path)?;
        let table = paid::bench::scan_table(&cfg, &s);
        paid::bench::emit(&cfg, &table, &mut std::io::stdout())?;
        println!("wrote {} rows to {path}", table.rows.len());
    }
    Ok(())
}
