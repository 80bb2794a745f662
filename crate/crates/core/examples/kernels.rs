//! Closed-form frequency kernels against brute-force numerical integration.
//!
//! cargo run --release --example kernels -- [omega]

use paid::frg::{kernel, kernel_oracle, Channel, KernelArgs};

fn main() -> paid::Result<()> {
    let omega: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.1);
    println!("omega = {omega}");
    println!(
        "{:>4} {:>8} {:>8} {:>24} {:>24} {:>10}",
        "ch", "e1", "e2", "closed form", "oracle", "rel diff"
    );
    let energies = [
        (0.0, 0.0),
        (0.3, 0.3),
        (0.3, -0.3),
        (1.2, -0.4),
        (-2.0, 3.5),
        (1e-4, 2e-4),
    ];
    for ch in [Channel::Pp, Channel::Ph] {
        for &(e1, e2) in &energies {
            let args = KernelArgs::new(omega, e1, e2);
            let k = kernel(ch, args)?;
            let o = kernel_oracle(ch, args, 1e-11)?;
            println!(
                "{:>4} {e1:>8} {e2:>8} {k:>24.16e} {o:>24.16e} {:>10.2e}",
                ch.as_str(),
                (k - o).abs() / o.abs().max(1.0)
            );
        }
    }
    Ok(())
}
