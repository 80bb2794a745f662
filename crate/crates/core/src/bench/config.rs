use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::adaptive::{AdaptiveConfig, ErrorMode};
use crate::error::{Error, Result};
use crate::frg::{Channel, ModelParams};

/// The five harness commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    EvalsSweep,
    Speedup,
    RuntimeSweep,
    Scan,
    Verify,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::EvalsSweep,
        Command::Speedup,
        Command::RuntimeSweep,
        Command::Scan,
        Command::Verify,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::EvalsSweep => "evals-sweep",
            Command::Speedup => "speedup",
            Command::RuntimeSweep => "runtime-sweep",
            Command::Scan => "scan",
            Command::Verify => "verify",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown command `{s}`")))
    }
}

/// Which drivers a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Paid,
    Local,
    Both,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Paid => "paid",
            Mode::Local => "local",
            Mode::Both => "both",
        }
    }

    pub fn runs_paid(&self) -> bool {
        matches!(self, Mode::Paid | Mode::Both)
    }

    pub fn runs_local(&self) -> bool {
        matches!(self, Mode::Local | Mode::Both)
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paid" => Ok(Mode::Paid),
            "local" => Ok(Mode::Local),
            "both" => Ok(Mode::Both),
            _ => Err(Error::InvalidArgument(format!("unknown mode `{s}`"))),
        }
    }
}

/// How the local baseline receives its per-member targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalTargetKind {
    MemberRelative,
    FamilyShare,
}

impl LocalTargetKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LocalTargetKind::MemberRelative => "member-relative",
            LocalTargetKind::FamilyShare => "family-share",
        }
    }
}

impl FromStr for LocalTargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "member-relative" => Ok(LocalTargetKind::MemberRelative),
            "family-share" => Ok(LocalTargetKind::FamilyShare),
            _ => Err(Error::InvalidArgument(format!(
                "unknown local target `{s}`"
            ))),
        }
    }
}

/// Denominator floor for member-relative local runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalFloor {
    /// `|sum of family values| / M`, taken from a global-error run.
    Auto,
    Fixed(f64),
}

impl fmt::Display for LocalFloor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalFloor::Auto => f.write_str("auto"),
            LocalFloor::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for LocalFloor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(LocalFloor::Auto);
        }
        let v: f64 = parse_num("local-floor", s)?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "local-floor must be positive, got {s}"
            )));
        }
        Ok(LocalFloor::Fixed(v))
    }
}

/// Geometric scale grid from `start` down to `stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl OmegaGrid {
    pub fn single(omega: f64) -> Self {
        OmegaGrid {
            start: omega,
            stop: omega,
            points: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.start.is_finite()
            && self.stop.is_finite()
            && self.start > 0.0
            && self.stop > 0.0
            && self.points >= 1
            && (self.points == 1 || self.start > self.stop);
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "scale grid needs start > stop > 0 and at least one point (or start alone), got {self:?}"
            )));
        }
        Ok(())
    }

    /// Strictly descending values; the endpoints are exact.
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let k = (self.points - 1) as f64;
        let ratio = (self.stop / self.start).ln();
        (0..self.points)
            .map(|i| match i {
                0 => self.start,
                _ if i == self.points - 1 => self.stop,
                _ => self.start * (ratio * i as f64 / k).exp(),
            })
            .collect()
    }
}

/// Everything a harness command needs. Built from per-command defaults,
/// then a `key=value` file, then command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub command: Command,
    pub mode: Mode,
    pub channel: Channel,
    pub l_values: Vec<[f64; 2]>,
    pub omega: OmegaGrid,
    pub basis_size: usize,
    pub n: usize,
    pub max_task: usize,
    pub workers: usize,
    pub epsilon: f64,
    pub epsilon_mode: ErrorMode,
    pub eval_budget: u64,
    pub params: ModelParams,
    pub local_target: LocalTargetKind,
    pub local_floor: LocalFloor,
    /// Timing repetitions per worker count.
    pub repeats: usize,
    pub grid_size: usize,
    /// Form-factor pair for `scan`.
    pub form_factors: (usize, usize),
    pub seed: u64,
    /// Relative error injected into the kernel under test by `verify`.
    pub kernel_perturbation: f64,
    pub out: Option<PathBuf>,
}

const FIG_L: [[f64; 2]; 2] = [[1.57, 1.31], [2.88, 0.26]];

/// Sweeps reach scales where one family needs a few `1e9` evaluations.
pub const BENCH_EVAL_BUDGET: u64 = 10_000_000_000;

pub fn available_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl BenchConfig {
    pub fn defaults(command: Command) -> Self {
        let base = BenchConfig {
            command,
            mode: Mode::Both,
            channel: Channel::Pp,
            l_values: FIG_L.to_vec(),
            omega: OmegaGrid {
                start: 10.0,
                stop: 1e-3,
                points: 20,
            },
            basis_size: 9,
            n: 4,
            max_task: 10,
            workers: 1,
            epsilon: 1e-6,
            epsilon_mode: ErrorMode::Relative,
            eval_budget: BENCH_EVAL_BUDGET,
            params: ModelParams::default(),
            local_target: LocalTargetKind::MemberRelative,
            local_floor: LocalFloor::Auto,
            repeats: 3,
            grid_size: 128,
            form_factors: (0, 0),
            seed: 20_170_601,
            kernel_perturbation: 0.0,
            out: None,
        };
        match command {
            Command::EvalsSweep | Command::Verify => base,
            Command::Speedup => BenchConfig {
                mode: Mode::Paid,
                omega: OmegaGrid::single(1e-3),
                basis_size: 25,
                n: 6,
                max_task: 18,
                workers: available_workers(),
                ..base
            },
            Command::RuntimeSweep => BenchConfig {
                basis_size: 25,
                max_task: 7,
                workers: available_workers(),
                ..base
            },
            Command::Scan => BenchConfig {
                l_values: vec![[3.14, 0.78]],
                omega: OmegaGrid::single(0.1),
                ..base
            },
        }
    }

    /// Apply one `key=value` setting. Keys are the long flag names without
    /// dashes; `_` and `-` are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "mode" => self.mode = value.parse()?,
            "channel" => self.channel = value.parse()?,
            "lx" => {
                let ly = self.l_values.first().map_or(0.0, |l| l[1]);
                self.l_values = vec![[parse_num(&key, value)?, ly]];
            }
            "ly" => {
                let lx = self.l_values.first().map_or(0.0, |l| l[0]);
                self.l_values = vec![[lx, parse_num(&key, value)?]];
            }
            "l" => self.l_values = parse_l_list(value)?,
            "omega-start" => self.omega.start = parse_num(&key, value)?,
            "omega-stop" => self.omega.stop = parse_num(&key, value)?,
            "omega-points" => self.omega.points = parse_num(&key, value)?,
            "basis-size" => self.basis_size = parse_num(&key, value)?,
            "cc-n" => self.n = parse_num(&key, value)?,
            "max-task" => self.max_task = parse_num(&key, value)?,
            "workers" => self.workers = parse_num(&key, value)?,
            "epsilon" => self.epsilon = parse_num(&key, value)?,
            "epsilon-mode" => self.epsilon_mode = value.parse()?,
            "eval-budget" => self.eval_budget = parse_budget(value)?,
            "t" => self.params.t = parse_num(&key, value)?,
            "t-prime" => self.params.t_prime = parse_num(&key, value)?,
            "mu" => self.params.mu = parse_num(&key, value)?,
            "local-target" => self.local_target = value.parse()?,
            "local-floor" => self.local_floor = value.parse()?,
            "repeats" => self.repeats = parse_num(&key, value)?,
            "grid-size" => self.grid_size = parse_num(&key, value)?,
            "ff-m" => self.form_factors.0 = parse_num(&key, value)?,
            "ff-n" => self.form_factors.1 = parse_num(&key, value)?,
            "seed" => self.seed = parse_num(&key, value)?,
            "kernel-perturbation" => self.kernel_perturbation = parse_num(&key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(Error::InvalidArgument(format!("unknown setting `{key}`"))),
        }
        Ok(())
    }

    /// Apply every setting of a flat `key=value` file. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, v) in parse_key_values(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidArgument(format!("cannot read config {}: {e}", path.display()))
        })?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.omega.validate()?;
        self.adaptive().validate()?;
        if self.basis_size != 9 && self.basis_size != 25 {
            return Err(Error::InvalidArgument(format!(
                "basis-size must be 9 or 25, got {}",
                self.basis_size
            )));
        }
        if self.l_values.is_empty() || self.l_values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bad transfer momenta {:?}",
                self.l_values
            )));
        }
        if !(self.kernel_perturbation.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "kernel-perturbation must lie in (-1, 1), got {}",
                self.kernel_perturbation
            )));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidArgument("repeats must be >= 1".into()));
        }
        if self.command == Command::Scan {
            if self.grid_size < 64 {
                return Err(Error::InvalidArgument(format!(
                    "scan grid-size must be >= 64, got {}",
                    self.grid_size
                )));
            }
            let (m, n) = self.form_factors;
            if m >= self.basis_size || n >= self.basis_size {
                return Err(Error::InvalidArgument(format!(
                    "form-factor pair ({m}, {n}) out of range for basis size {}",
                    self.basis_size
                )));
            }
        }
        if self.command == Command::Speedup && self.workers > available_workers() {
            return Err(Error::InvalidArgument(format!(
                "speedup needs workers <= available hardware threads ({}), got {}",
                available_workers(),
                self.workers
            )));
        }
        Ok(())
    }

    pub fn adaptive(&self) -> AdaptiveConfig {
        AdaptiveConfig {
            epsilon: self.epsilon,
            epsilon_mode: self.epsilon_mode,
            n: self.n,
            max_task: self.max_task,
            workers: self.workers,
            eval_budget: self.eval_budget,
            ..AdaptiveConfig::default()
        }
    }

    /// Every setting in `key=value` form, readable back by [`Self::apply_text`].
    pub fn settings(&self) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = vec![
            ("mode".into(), self.mode.as_str().into()),
            ("channel".into(), self.channel.as_str().into()),
            ("l".into(), format_l_list(&self.l_values)),
            ("omega-start".into(), self.omega.start.to_string()),
            ("omega-stop".into(), self.omega.stop.to_string()),
            ("omega-points".into(), self.omega.points.to_string()),
            ("basis-size".into(), self.basis_size.to_string()),
            ("cc-n".into(), self.n.to_string()),
            ("max-task".into(), self.max_task.to_string()),
            ("workers".into(), self.workers.to_string()),
            ("epsilon".into(), self.epsilon.to_string()),
            ("epsilon-mode".into(), self.epsilon_mode.as_str().into()),
            ("eval-budget".into(), self.eval_budget.to_string()),
            ("t".into(), self.params.t.to_string()),
            ("t-prime".into(), self.params.t_prime.to_string()),
            ("mu".into(), self.params.mu.to_string()),
            ("local-target".into(), self.local_target.as_str().into()),
            ("local-floor".into(), self.local_floor.to_string()),
            ("repeats".into(), self.repeats.to_string()),
            ("grid-size".into(), self.grid_size.to_string()),
            ("ff-m".into(), self.form_factors.0.to_string()),
            ("ff-n".into(), self.form_factors.1.to_string()),
            ("seed".into(), self.seed.to_string()),
            (
                "kernel-perturbation".into(),
                self.kernel_perturbation.to_string(),
            ),
        ];
        if let Some(p) = &self.out {
            v.push(("out".into(), p.display().to_string()));
        }
        v
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("cannot parse `{value}` for {key}")))
}

/// Integer budgets also accept `1e9`-style input.
fn parse_budget(value: &str) -> Result<u64> {
    if let Ok(v) = value.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = parse_num("eval-budget", value)?;
    if f >= 1.0 && f.fract() == 0.0 && f < u64::MAX as f64 {
        Ok(f as u64)
    } else {
        Err(Error::InvalidArgument(format!(
            "cannot parse `{value}` for eval-budget"
        )))
    }
}

fn parse_l_list(value: &str) -> Result<Vec<[f64; 2]>> {
    value
        .split(';')
        .map(|pair| {
            let mut it = pair.split(',');
            match (it.next(), it.next(), it.next()) {
                (Some(x), Some(y), None) => {
                    Ok([parse_num("l", x.trim())?, parse_num("l", y.trim())?])
                }
                _ => Err(Error::InvalidArgument(format!(
                    "cannot parse transfer momentum `{pair}`"
                ))),
            }
        })
        .collect()
}

fn format_l_list(l: &[[f64; 2]]) -> String {
    l.iter()
        .map(|[x, y]| format!("{x},{y}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Split flat `key=value` text into pairs.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("config line {} is not key=value: `{line}`", i + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_is_descending_with_exact_ends() {
        let g = BenchConfig::defaults(Command::EvalsSweep).omega.values();
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], 10.0);
        assert_eq!(g[19], 1e-3);
        assert!(g.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn command_defaults() {
        let s = BenchConfig::defaults(Command::Speedup);
        assert_eq!((s.basis_size, s.n, s.max_task), (25, 6, 18));
        assert_eq!(s.omega.values(), vec![1e-3]);
        let r = BenchConfig::defaults(Command::RuntimeSweep);
        assert_eq!((r.basis_size, r.n, r.max_task), (25, 4, 7));
        let e = BenchConfig::defaults(Command::EvalsSweep);
        assert_eq!(
            (e.basis_size, e.n, e.max_task, e.l_values.len()),
            (9, 4, 10, 2)
        );
    }

    #[test]
    fn settings_round_trip() {
        let mut c = BenchConfig::defaults(Command::EvalsSweep);
        c.apply_text("# comment\nlx = 0.5\n\nly=0.25\nepsilon_mode=absolute\neval-budget=2e9\n")
            .unwrap();
        assert_eq!(c.l_values, vec![[0.5, 0.25]]);
        assert_eq!(c.epsilon_mode, ErrorMode::Absolute);
        assert_eq!(c.eval_budget, 2_000_000_000);
        let text: String = c
            .settings()
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        let mut d = BenchConfig::defaults(Command::EvalsSweep);
        d.apply_text(&text).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn rejects_bad_settings() {
        let mut c = BenchConfig::defaults(Command::EvalsSweep);
        assert!(c.set("colour", "red").is_err());
        assert!(c.set("cc-n", "four").is_err());
        assert!(c.apply_text("just a line").is_err());
        c.set("omega-stop", "20").unwrap();
        assert!(c.validate().is_err());
        let mut c = BenchConfig::defaults(Command::Scan);
        c.set("grid-size", "32").unwrap();
        assert!(c.validate().is_err());
    }
}
