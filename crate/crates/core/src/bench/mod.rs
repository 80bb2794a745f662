//! Experiment drivers behind `paid-bench`.
//!
//! Each command turns a [`BenchConfig`] into a [`CsvTable`] whose `#` header
//! carries every setting needed to rerun it. Wall times cover the
//! integration call only; family construction is excluded.

mod config;
mod csv;
pub mod verify;

use std::io::Write;
use std::time::Instant;

pub use config::{
    available_workers, parse_key_values, BenchConfig, Command, LocalFloor, LocalTargetKind, Mode,
    OmegaGrid, BENCH_EVAL_BUDGET,
};
pub use csv::{format_float, Cell, CsvTable};
pub use verify::{verify_all, verify_all_perturbed, SuiteReport, VerifyReport};

use crate::adaptive::{run_adaptive, AdaptiveConfig, FamilyResult, IntegrandFamily};
use crate::baseline::{run_family_local_with, LocalTarget};
use crate::error::{Error, Result};
use crate::frg::{build_family, scan_integrand, BubbleSpec, IntegrandScan};

/// Which driver produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    Paid,
    Local,
}

impl Driver {
    pub fn as_str(&self) -> &'static str {
        match self {
            Driver::Paid => "paid",
            Driver::Local => "local",
        }
    }
}

/// One `(l, omega, driver)` row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub l: [f64; 2],
    pub omega: f64,
    pub mode: Driver,
    pub eval_count: u64,
    pub task_count: usize,
    pub wall_time_seconds: f64,
    pub global_err: f64,
    pub threshold: f64,
    pub converged: bool,
    /// Sum of `|value|` over members.
    pub checksum: f64,
    pub family_sum: f64,
    /// Denominator floor given to member-relative local runs; NaN otherwise.
    pub member_floor: f64,
    pub values: Vec<f64>,
    pub member_evals: Vec<u64>,
    pub failure: Option<String>,
}

impl BenchRecord {
    fn from_result(
        l: [f64; 2],
        omega: f64,
        mode: Driver,
        r: &FamilyResult,
        secs: f64,
        floor: f64,
    ) -> Self {
        BenchRecord {
            l,
            omega,
            mode,
            eval_count: r.eval_count,
            task_count: r.task_count,
            wall_time_seconds: secs,
            global_err: r.global_err,
            threshold: r.threshold,
            converged: r.converged,
            checksum: r.values.iter().map(|v| v.abs()).sum(),
            family_sum: r.values.iter().sum(),
            member_floor: floor,
            values: r.values.clone(),
            member_evals: r.member_evals.clone(),
            failure: None,
        }
    }

    fn failed(l: [f64; 2], omega: f64, mode: Driver, e: &Error) -> Self {
        BenchRecord {
            l,
            omega,
            mode,
            eval_count: 0,
            task_count: 0,
            wall_time_seconds: f64::NAN,
            global_err: f64::NAN,
            threshold: f64::NAN,
            converged: false,
            checksum: f64::NAN,
            family_sum: f64::NAN,
            member_floor: f64::NAN,
            values: Vec::new(),
            member_evals: Vec::new(),
            failure: Some(e.to_string()),
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

/// Per-member target and floor for the local baseline, given the family sum
/// of a global-error run when one is needed.
fn local_target(
    cfg: &BenchConfig,
    members: usize,
    reference_total: Option<f64>,
) -> (LocalTarget, AdaptiveConfig, f64) {
    let base = cfg.adaptive();
    match cfg.local_target {
        LocalTargetKind::FamilyShare => (
            LocalTarget::FamilyShare {
                reference_total: reference_total.unwrap_or(0.0),
            },
            base,
            f64::NAN,
        ),
        LocalTargetKind::MemberRelative => {
            let floor = match cfg.local_floor {
                LocalFloor::Fixed(v) => v,
                LocalFloor::Auto => {
                    (reference_total.unwrap_or(0.0).abs() / members as f64).max(base.value_floor)
                }
            };
            (
                LocalTarget::MemberRelative,
                base.with_value_floor(floor),
                floor,
            )
        }
    }
}

fn needs_reference(cfg: &BenchConfig) -> bool {
    match cfg.local_target {
        LocalTargetKind::MemberRelative => {
            cfg.local_floor == LocalFloor::Auto
                && cfg.epsilon_mode == crate::adaptive::ErrorMode::Relative
        }
        LocalTargetKind::FamilyShare => cfg.epsilon_mode == crate::adaptive::ErrorMode::Relative,
    }
}

/// Run one family through the drivers selected by `cfg.mode`.
pub fn run_point(
    cfg: &BenchConfig,
    l: [f64; 2],
    omega: f64,
    family: &IntegrandFamily,
) -> Vec<BenchRecord> {
    let adaptive = cfg.adaptive();
    let mut out = Vec::new();
    let mut reference = None;
    if cfg.mode.runs_paid() || (cfg.mode.runs_local() && needs_reference(cfg)) {
        let (r, secs) = timed(|| run_adaptive(family, &adaptive));
        match r {
            Ok(r) => {
                reference = Some(r.values.iter().sum::<f64>());
                if cfg.mode.runs_paid() {
                    out.push(BenchRecord::from_result(
                        l,
                        omega,
                        Driver::Paid,
                        &r,
                        secs,
                        f64::NAN,
                    ));
                }
            }
            Err(e) => {
                out.push(BenchRecord::failed(l, omega, Driver::Paid, &e));
                if cfg.mode.runs_local() {
                    out.push(BenchRecord::failed(l, omega, Driver::Local, &e));
                }
                return out;
            }
        }
    }
    if cfg.mode.runs_local() {
        let (target, local_cfg, floor) = local_target(cfg, family.len(), reference);
        let (r, secs) = timed(|| run_family_local_with(family, &local_cfg, target));
        out.push(match r {
            Ok(r) => BenchRecord::from_result(l, omega, Driver::Local, &r, secs, floor),
            Err(e) => BenchRecord::failed(l, omega, Driver::Local, &e),
        });
    }
    out
}

/// Every `(l, omega)` point of the grid, descending in `omega`, through the
/// drivers selected by `cfg.mode`. Run failures become unconverged rows.
pub fn sweep(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    sweep_with(cfg, |_| {})
}

/// [`sweep`] with a callback per finished record.
pub fn sweep_with(
    cfg: &BenchConfig,
    mut progress: impl FnMut(&BenchRecord),
) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &l in &cfg.l_values {
        for omega in cfg.omega.values() {
            let spec =
                BubbleSpec::new(cfg.channel, l, omega, cfg.basis_size)?.with_params(cfg.params)?;
            let family = build_family(&spec)?;
            for rec in run_point(cfg, l, omega, &family) {
                progress(&rec);
                out.push(rec);
            }
        }
    }
    Ok(out)
}

fn base_metadata(cfg: &BenchConfig, table: &mut CsvTable) {
    table.meta("tool", format!("paid-bench {}", env!("CARGO_PKG_VERSION")));
    table.meta("command", cfg.command.as_str());
    for (k, v) in cfg.settings() {
        table.meta(k, v);
    }
    table.meta("value-floor", crate::adaptive::VALUE_FLOOR);
    table.meta("domain", "[-pi,pi]x[-pi,pi]");
    table.meta(
        "dispersion",
        "eps(k)=-2t(cos kx+cos ky)-4t' cos kx cos ky-mu",
    );
    table.meta("regulator", "theta(k0)=k0^2/(k0^2+omega^2)");
    if let Ok(spec) = BubbleSpec::new(cfg.channel, [0.0, 0.0], 1.0, cfg.basis_size) {
        let names: Vec<String> = (0..cfg.basis_size)
            .map(|i| format!("{i}:{}", spec.basis.describe(i)))
            .collect();
        table.meta("basis", names.join(" "));
        table.meta(
            "basis-normalization",
            "1/sqrt(2pi) per constant axis factor, 1/sqrt(pi) otherwise",
        );
    }
    table.meta("members", "unordered pairs (m<=n) labelled m,n");
    table.meta("hardware-threads", available_workers());
}

pub fn sweep_table(cfg: &BenchConfig, records: &[BenchRecord]) -> CsvTable {
    let mut t = CsvTable::new(&[
        "lx",
        "ly",
        "omega",
        "mode",
        "eval_count",
        "task_count",
        "wall_time_seconds",
        "global_err",
        "threshold",
        "converged",
        "checksum",
        "family_sum",
        "member_floor",
        "failure",
    ]);
    base_metadata(cfg, &mut t);
    t.meta(
        "local-convention",
        match cfg.local_target {
            LocalTargetKind::MemberRelative => {
                "each member stops at err < epsilon*max(|own value|, member_floor); absolute mode uses epsilon/M"
            }
            LocalTargetKind::FamilyShare => "each member stops at err < (family threshold)/M",
        },
    );
    for r in records {
        t.push(vec![
            r.l[0].into(),
            r.l[1].into(),
            r.omega.into(),
            r.mode.as_str().into(),
            r.eval_count.into(),
            r.task_count.into(),
            r.wall_time_seconds.into(),
            r.global_err.into(),
            r.threshold.into(),
            r.converged.into(),
            r.checksum.into(),
            r.family_sum.into(),
            r.member_floor.into(),
            r.failure.clone().unwrap_or_default().into(),
        ]);
    }
    t
}

/// Timing of the global-error driver at one worker count.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupPoint {
    pub l: [f64; 2],
    pub workers: usize,
    pub times: Vec<f64>,
    pub median: f64,
    /// `median(1 worker) / median(workers)`.
    pub speedup: f64,
    pub eval_count: u64,
    /// Largest `|value - value at 1 worker|` over members and repeats.
    pub max_deviation: f64,
    /// `10` times the threshold of the single-worker run.
    pub tolerance: f64,
}

impl SpeedupPoint {
    pub fn invariant(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

/// `1, 2, 4, ...` below `max`, then `max` itself.
pub fn worker_counts(max: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut w = 1;
    while w < max {
        v.push(w);
        w *= 2;
    }
    v.push(max.max(1));
    v
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Wall time of the global-error driver at the first grid scale for each
/// worker count, `cfg.repeats` times each.
pub fn speedup(cfg: &BenchConfig) -> Result<Vec<SpeedupPoint>> {
    cfg.validate()?;
    let omega = cfg.omega.values()[0];
    let mut out = Vec::new();
    for &l in &cfg.l_values {
        let spec =
            BubbleSpec::new(cfg.channel, l, omega, cfg.basis_size)?.with_params(cfg.params)?;
        let family = build_family(&spec)?;
        let mut serial: Option<(Vec<f64>, f64, f64)> = None;
        for workers in worker_counts(cfg.workers) {
            let ac = cfg.adaptive().with_workers(workers);
            let mut times = Vec::with_capacity(cfg.repeats);
            let mut dev = 0.0f64;
            let mut evals = 0;
            for _ in 0..cfg.repeats {
                let (r, secs) = timed(|| run_adaptive(&family, &ac));
                let r = r?;
                times.push(secs);
                evals = r.eval_count;
                match &serial {
                    None => serial = Some((r.values.clone(), 10.0 * r.threshold, 0.0)),
                    Some((v1, _, _)) => {
                        for (a, b) in r.values.iter().zip(v1) {
                            dev = dev.max((a - b).abs());
                        }
                    }
                }
            }
            let med = median(&times);
            let s = serial.as_mut().expect("first worker count ran");
            if workers == 1 {
                s.2 = med;
            }
            out.push(SpeedupPoint {
                l,
                workers,
                times,
                median: med,
                speedup: if s.2 > 0.0 { s.2 / med } else { f64::NAN },
                eval_count: evals,
                max_deviation: dev,
                tolerance: s.1,
            });
        }
    }
    Ok(out)
}

pub fn speedup_table(cfg: &BenchConfig, points: &[SpeedupPoint]) -> CsvTable {
    let mut t = CsvTable::new(&[
        "lx",
        "ly",
        "omega",
        "workers",
        "repeats",
        "median_seconds",
        "min_seconds",
        "max_seconds",
        "speedup",
        "eval_count",
        "max_value_deviation",
        "tolerance",
        "thread_invariant",
    ]);
    base_metadata(cfg, &mut t);
    t.meta(
        "timing",
        "median of repeats; speedup = median(1 worker) / median(workers)",
    );
    let omega = cfg.omega.values()[0];
    for p in points {
        let min = p.times.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = p.times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        t.push(vec![
            p.l[0].into(),
            p.l[1].into(),
            omega.into(),
            p.workers.into(),
            p.times.len().into(),
            p.median.into(),
            min.into(),
            max.into(),
            p.speedup.into(),
            p.eval_count.into(),
            p.max_deviation.into(),
            p.tolerance.into(),
            p.invariant().into(),
        ]);
    }
    t
}

/// Grid scan of one `phi_mn` at the first transfer momentum and scale.
pub fn scan(cfg: &BenchConfig) -> Result<IntegrandScan> {
    cfg.validate()?;
    let spec = BubbleSpec::new(
        cfg.channel,
        cfg.l_values[0],
        cfg.omega.values()[0],
        cfg.basis_size,
    )?
    .with_params(cfg.params)?;
    scan_integrand(&spec, cfg.form_factors.0, cfg.form_factors.1, cfg.grid_size)
}

pub fn scan_table(cfg: &BenchConfig, s: &IntegrandScan) -> CsvTable {
    let mut t = CsvTable::new(&["px", "py", "value"]);
    base_metadata(cfg, &mut t);
    t.meta("scan-omega", cfg.omega.values()[0]);
    t.meta(
        "scan-l",
        format!("{},{}", cfg.l_values[0][0], cfg.l_values[0][1]),
    );
    t.meta("grid", "cell-centred, row-major in px");
    t.meta("sharpness", format_float(s.sharpness()));
    for p in &s.points {
        t.push(vec![p[0].into(), p[1].into(), p[2].into()]);
    }
    t
}

pub fn verify_table(cfg: &BenchConfig, report: &VerifyReport) -> CsvTable {
    let mut t = CsvTable::new(&[
        "suite",
        "cases",
        "failures",
        "worst",
        "tolerance",
        "passed",
        "first_failure",
    ]);
    base_metadata(cfg, &mut t);
    for s in &report.suites {
        t.push(vec![
            s.name.into(),
            s.cases.into(),
            s.failures.into(),
            s.worst.into(),
            s.tolerance.into(),
            s.passed().into(),
            s.first_failure.clone().unwrap_or_default().into(),
        ]);
    }
    t
}

/// Outcome of [`run_command`].
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutcome {
    pub table: CsvTable,
    /// Human-readable lines for the terminal.
    pub summary: Vec<String>,
    /// `false` for a failed `verify` or a thread-variant `speedup`.
    pub passed: bool,
    /// Some sweep rows carry a failure instead of a result.
    pub evaluation_failed: bool,
}

/// Run `cfg.command` and build its table.
pub fn run_command(cfg: &BenchConfig) -> Result<CommandOutcome> {
    cfg.validate()?;
    let mut summary = Vec::new();
    let mut evaluation_failed = false;
    let (table, passed) = match cfg.command {
        Command::EvalsSweep | Command::RuntimeSweep => {
            let recs = sweep_with(cfg, |r| {
                eprintln!(
                    "l=({}, {}) omega={:.4e} {:<5} evals={} time={:.3}s converged={}",
                    r.l[0],
                    r.l[1],
                    r.omega,
                    r.mode.as_str(),
                    r.eval_count,
                    r.wall_time_seconds,
                    r.converged
                )
            })?;
            if recs.iter().any(|r| r.failure.is_some()) {
                evaluation_failed = true;
                summary.push("some runs failed; see the failure column".to_string());
            }
            (sweep_table(cfg, &recs), true)
        }
        Command::Speedup => {
            let pts = speedup(cfg)?;
            for p in &pts {
                summary.push(format!(
                    "l=({}, {}) workers={} median={:.3}s speedup={:.3} invariant={}",
                    p.l[0],
                    p.l[1],
                    p.workers,
                    p.median,
                    p.speedup,
                    p.invariant()
                ));
            }
            let invariant = pts.iter().all(SpeedupPoint::invariant);
            if !invariant {
                summary.push(
                    "member values differ between worker counts by more than 10 epsilon"
                        .to_string(),
                );
            }
            (speedup_table(cfg, &pts), invariant)
        }
        Command::Scan => {
            let s = scan(cfg)?;
            summary.push(format!("sharpness={}", format_float(s.sharpness())));
            (scan_table(cfg, &s), true)
        }
        Command::Verify => {
            let rep = verify_all_perturbed(cfg.seed, cfg.kernel_perturbation)?;
            for s in &rep.suites {
                summary.push(format!(
                    "{:<22} {} cases={} failures={} worst={:.3e} tol={:.1e}",
                    s.name,
                    if s.passed() { "PASS" } else { "FAIL" },
                    s.cases,
                    s.failures,
                    s.worst,
                    s.tolerance
                ));
            }
            (verify_table(cfg, &rep), rep.passed())
        }
    };
    Ok(CommandOutcome {
        table,
        summary,
        passed,
        evaluation_failed,
    })
}

/// Write the table to `cfg.out`, or to `fallback` when no path is set.
pub fn emit(cfg: &BenchConfig, table: &CsvTable, fallback: &mut dyn Write) -> Result<()> {
    match &cfg.out {
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .map_err(|e| Error::Io(format!("cannot create {}: {e}", path.display())))?;
            table.write_to(&mut f)
        }
        None => table.write_to(fallback),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(command: Command) -> BenchConfig {
        let mut c = BenchConfig::defaults(command);
        c.apply_text("omega-start=10\nomega-stop=3\nomega-points=2\nlx=1.57\nly=1.31\nworkers=1\n")
            .unwrap();
        c
    }

    #[test]
    fn sweep_rows_and_header() {
        let cfg = tiny(Command::EvalsSweep);
        let recs = sweep(&cfg).unwrap();
        assert_eq!(recs.len(), 4);
        assert!(recs.iter().all(|r| r.converged && r.checksum.is_finite()));
        let text = sweep_table(&cfg, &recs).render();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body.len(), 5);
        assert!(
            text.contains("# t=1\n") && text.contains("# t-prime=0\n") && text.contains("# mu=0\n")
        );
        assert!(text.contains("# epsilon=0.000001\n"));
        assert!(text.contains("cos(px)sin(py)"));
    }

    #[test]
    fn sweep_content_is_deterministic() {
        let mut cfg = tiny(Command::EvalsSweep);
        cfg.mode = Mode::Paid;
        let strip = |recs: Vec<BenchRecord>| -> Vec<BenchRecord> {
            recs.into_iter()
                .map(|mut r| {
                    r.wall_time_seconds = 0.0;
                    r.member_floor = 0.0;
                    r
                })
                .collect()
        };
        assert_eq!(strip(sweep(&cfg).unwrap()), strip(sweep(&cfg).unwrap()));
    }

    #[test]
    fn worker_lists() {
        assert_eq!(worker_counts(1), vec![1]);
        assert_eq!(worker_counts(4), vec![1, 2, 4]);
        assert_eq!(worker_counts(6), vec![1, 2, 4, 6]);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn single_worker_speedup_is_one() {
        let mut cfg = tiny(Command::Speedup);
        cfg.apply_text("omega-start=2\nomega-points=1\nbasis-size=9\nrepeats=1\n")
            .unwrap();
        let pts = speedup(&cfg).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].speedup, 1.0);
        assert!(pts[0].invariant());
    }

    #[test]
    fn scan_grid() {
        let mut cfg = BenchConfig::defaults(Command::Scan);
        cfg.grid_size = 64;
        let s = scan(&cfg).unwrap();
        let t = scan_table(&cfg, &s);
        assert_eq!(t.rows.len(), 64 * 64);
        assert!(s.points.iter().all(|p| p[2].is_finite()));
    }
}
