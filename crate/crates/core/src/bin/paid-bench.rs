use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use paid::bench::{emit, run_command, BenchConfig, Command};
use paid::Error;

#[derive(Parser)]
#[command(
    name = "paid-bench",
    version,
    about = "Benchmarks for global-error adaptive quadrature of bubble-integral families"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Evaluation counts of both drivers over a scale sweep.
    EvalsSweep(Flags),
    /// Wall time against worker count at one scale.
    Speedup(Flags),
    /// Wall time of both drivers over a scale sweep.
    RuntimeSweep(Flags),
    /// One integrand on a uniform grid, plus its sharpness.
    Scan(Flags),
    /// Run the self-check suites.
    Verify(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// paid, local or both.
    #[arg(long)]
    mode: Option<String>,
    /// pp or ph.
    #[arg(long)]
    channel: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lx: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    ly: Option<String>,
    #[arg(long)]
    omega_start: Option<String>,
    #[arg(long)]
    omega_stop: Option<String>,
    #[arg(long)]
    omega_points: Option<String>,
    /// 9 or 25.
    #[arg(long)]
    basis_size: Option<String>,
    /// Coarse rule order N; the fine rule uses 2N.
    #[arg(long)]
    cc_n: Option<String>,
    #[arg(long)]
    max_task: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// absolute or relative.
    #[arg(long)]
    epsilon_mode: Option<String>,
    #[arg(long)]
    eval_budget: Option<String>,
    /// member-relative or family-share.
    #[arg(long)]
    local_target: Option<String>,
    /// auto or a positive number.
    #[arg(long)]
    local_floor: Option<String>,
    #[arg(long)]
    repeats: Option<String>,
    #[arg(long)]
    grid_size: Option<String>,
    /// First form factor for scan.
    #[arg(long)]
    ff_m: Option<String>,
    /// Second form factor for scan.
    #[arg(long)]
    ff_n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t_prime: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// verify only: scale the kernel under test by 1 + this.
    #[arg(long, allow_hyphen_values = true)]
    kernel_perturbation: Option<String>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<String>,
    /// Flat key=value file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("mode", &self.mode),
            ("channel", &self.channel),
            ("lx", &self.lx),
            ("ly", &self.ly),
            ("omega-start", &self.omega_start),
            ("omega-stop", &self.omega_stop),
            ("omega-points", &self.omega_points),
            ("basis-size", &self.basis_size),
            ("cc-n", &self.cc_n),
            ("max-task", &self.max_task),
            ("workers", &self.workers),
            ("epsilon", &self.epsilon),
            ("epsilon-mode", &self.epsilon_mode),
            ("eval-budget", &self.eval_budget),
            ("local-target", &self.local_target),
            ("local-floor", &self.local_floor),
            ("repeats", &self.repeats),
            ("grid-size", &self.grid_size),
            ("ff-m", &self.ff_m),
            ("ff-n", &self.ff_n),
            ("t", &self.t),
            ("t-prime", &self.t_prime),
            ("mu", &self.mu),
            ("seed", &self.seed),
            ("kernel-perturbation", &self.kernel_perturbation),
            ("out", &self.out),
        ]
    }
}

fn build(command: Command, flags: &Flags) -> Result<BenchConfig, Error> {
    let mut cfg = BenchConfig::defaults(command);
    if let Some(path) = &flags.config {
        cfg.apply_file(path)?;
    }
    for (key, value) in flags.pairs() {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match &cli.command {
        Sub::EvalsSweep(f) => (Command::EvalsSweep, f),
        Sub::Speedup(f) => (Command::Speedup, f),
        Sub::RuntimeSweep(f) => (Command::RuntimeSweep, f),
        Sub::Scan(f) => (Command::Scan, f),
        Sub::Verify(f) => (Command::Verify, f),
    };
    let result = build(command, flags).and_then(|cfg| {
        let outcome = run_command(&cfg)?;
        emit(&cfg, &outcome.table, &mut io::stdout())?;
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            for line in &outcome.summary {
                eprintln!("{line}");
            }
            if outcome.evaluation_failed {
                ExitCode::from(3)
            } else if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("paid-bench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
