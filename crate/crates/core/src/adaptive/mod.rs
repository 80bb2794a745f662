//! Globally adaptive integration of a whole family of integrands.
//!
//! Every `(member, subdomain)` pair is a [`Task`] in one shared max-heap.
//! Workers repeatedly pull the `max_task` tasks with the largest error,
//! bisect each domain along both axes, evaluate the four children outside
//! the lock and commit them back. The run stops once the summed error of
//! all tasks of all members drops below the threshold, so effort flows to
//! whichever member and region currently dominate the error.

mod container;
mod family;

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;

pub use container::{Task, TaskContainer};
pub use family::IntegrandFamily;

use container::CompensatedSum;

use crate::error::{Error, Result};
use crate::rules::{make_pair, Integrand, QuadPairRule, Rectangle};

/// Denominator floor for relative error targets.
pub const VALUE_FLOOR: f64 = 1e-12;

/// Domains with a side below this length are never bisected.
pub const MIN_SIDE: f64 = 1e-12;

pub const DEFAULT_EVAL_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMode {
    Absolute,
    /// Relative to `max(|sum of values|, value_floor)`.
    Relative,
}

impl ErrorMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorMode::Absolute => "absolute",
            ErrorMode::Relative => "relative",
        }
    }
}

impl std::str::FromStr for ErrorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" | "abs" => Ok(ErrorMode::Absolute),
            "relative" | "rel" => Ok(ErrorMode::Relative),
            _ => Err(Error::InvalidArgument(format!("unknown error mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub epsilon: f64,
    pub epsilon_mode: ErrorMode,
    /// Coarse rule order; the fine rule uses `2N`.
    pub n: usize,
    /// Tasks pulled from the heap per critical-region entry.
    pub max_task: usize,
    pub workers: usize,
    /// Hard cap on integrand evaluations.
    pub eval_budget: u64,
    /// Smallest denominator used in relative mode.
    pub value_floor: f64,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            epsilon: 1e-6,
            epsilon_mode: ErrorMode::Relative,
            n: 4,
            max_task: 10,
            workers: 1,
            eval_budget: DEFAULT_EVAL_BUDGET,
            value_floor: VALUE_FLOOR,
        }
    }
}

impl AdaptiveConfig {
    pub fn absolute(epsilon: f64, n: usize) -> Self {
        AdaptiveConfig {
            epsilon,
            epsilon_mode: ErrorMode::Absolute,
            n,
            ..Default::default()
        }
    }

    pub fn relative(epsilon: f64, n: usize) -> Self {
        AdaptiveConfig {
            epsilon,
            epsilon_mode: ErrorMode::Relative,
            n,
            ..Default::default()
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_max_task(mut self, max_task: usize) -> Self {
        self.max_task = max_task;
        self
    }

    pub fn with_eval_budget(mut self, budget: u64) -> Self {
        self.eval_budget = budget;
        self
    }

    pub fn with_value_floor(mut self, floor: f64) -> Self {
        self.value_floor = floor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidArgument(what));
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.n < 2 || self.n % 2 != 0 {
            return bad(format!("N must be even and >= 2, got {}", self.n));
        }
        if self.max_task == 0 {
            return bad("max_task must be >= 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be >= 1".into());
        }
        if self.eval_budget == 0 {
            return bad("eval_budget must be >= 1".into());
        }
        if !(self.value_floor > 0.0) || !self.value_floor.is_finite() {
            return bad(format!(
                "value_floor must be positive, got {}",
                self.value_floor
            ));
        }
        Ok(())
    }

    /// Absolute error target for a family whose values currently sum to `total`.
    pub fn threshold(&self, total: f64) -> f64 {
        match self.epsilon_mode {
            ErrorMode::Absolute => self.epsilon,
            ErrorMode::Relative => self.epsilon * total.abs().max(self.value_floor),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyResult {
    /// Per-member sum of fine-rule values over its leaf subdomains.
    pub values: Vec<f64>,
    pub global_err: f64,
    /// The absolute threshold `global_err` was compared against.
    pub threshold: f64,
    pub eval_count: u64,
    pub member_evals: Vec<u64>,
    /// Leaf subdomains summed over members.
    pub task_count: usize,
    pub refinements: u64,
    pub converged: bool,
}

/// One committed refinement, in commit order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub member: usize,
    pub domain: Rectangle,
    pub err: f64,
    pub worker: usize,
    /// The done flag was already raised when this refinement was committed.
    pub after_done: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RefinementTrace {
    pub refinements: Vec<Refinement>,
}

impl RefinementTrace {
    pub fn excess(&self) -> usize {
        self.refinements.iter().filter(|r| r.after_done).count()
    }
}

/// One task per member over the full domain, heapified.
pub fn init_container(family: &IntegrandFamily, pair: &QuadPairRule) -> Result<TaskContainer> {
    family.ensure_nonempty()?;
    init_members(&family.member_refs(), family.domain(), pair)
}

fn init_members(
    members: &[&dyn Integrand],
    domain: Rectangle,
    pair: &QuadPairRule,
) -> Result<TaskContainer> {
    let mut tasks = Vec::with_capacity(members.len());
    for (id, f) in members.iter().enumerate() {
        let r = pair.integrate(*f, &domain).map_err(|e| e.with_member(id))?;
        tasks.push(Task::from_pair(id, domain, &r));
    }
    Ok(TaskContainer::from_tasks(tasks))
}

/// Bisect `task.domain` along both axes and evaluate the pair rule on each quadrant.
pub fn refine_task(
    task: &Task,
    family: &IntegrandFamily,
    pair: &QuadPairRule,
) -> Result<[Task; 4]> {
    refine_with(task, family.member(task.id), pair)
}

fn refine_with(task: &Task, f: &dyn Integrand, pair: &QuadPairRule) -> Result<[Task; 4]> {
    let quads = task.domain.quadrants();
    let mut out = [*task; 4];
    for (slot, q) in out.iter_mut().zip(quads) {
        let r = pair.integrate(f, &q).map_err(|e| e.with_member(task.id))?;
        *slot = Task::from_pair(task.id, q, &r);
    }
    Ok(out)
}

/// Swap `parents` for `children` in the container; returns the new global error.
pub fn commit(container: &mut TaskContainer, parents: &[Task], children: &[Task]) -> f64 {
    container.commit(parents, children)
}

/// Integrate every member of `family` with one global error criterion.
pub fn run_adaptive(family: &IntegrandFamily, config: &AdaptiveConfig) -> Result<FamilyResult> {
    family.ensure_nonempty()?;
    drive(&family.member_refs(), family.domain(), config, None)
}

/// [`run_adaptive`] that also returns every committed refinement.
pub fn run_adaptive_traced(
    family: &IntegrandFamily,
    config: &AdaptiveConfig,
) -> Result<(FamilyResult, RefinementTrace)> {
    family.ensure_nonempty()?;
    let mut trace = RefinementTrace::default();
    let r = drive(
        &family.member_refs(),
        family.domain(),
        config,
        Some(&mut trace),
    )?;
    Ok((r, trace))
}

/// Single worker refining one task at a time. Bit-reproducible.
pub fn serial_reference(family: &IntegrandFamily, config: &AdaptiveConfig) -> Result<FamilyResult> {
    let cfg = AdaptiveConfig {
        workers: 1,
        max_task: 1,
        ..*config
    };
    run_adaptive(family, &cfg)
}

pub(crate) fn drive_single(
    member: &dyn Integrand,
    domain: Rectangle,
    config: &AdaptiveConfig,
) -> Result<FamilyResult> {
    drive(&[member], domain, config, None)
}

struct State {
    container: TaskContainer,
    /// Tasks extracted but not yet committed, and their summed error.
    in_flight: usize,
    in_flight_err: f64,
    member_evals: Vec<u64>,
    refinements: u64,
    trace: Option<Vec<Refinement>>,
}

struct Shared<'a> {
    members: &'a [&'a dyn Integrand],
    pair: QuadPairRule,
    config: AdaptiveConfig,
    state: Mutex<State>,
    done: AtomicBool,
    evals: AtomicU64,
    failure: Mutex<Option<Error>>,
}

impl Shared<'_> {
    fn fail(&self, e: Error) {
        let mut slot = self.failure.lock().unwrap();
        if slot.is_none() {
            *slot = Some(e);
        }
        self.done.store(true, Ordering::Release);
    }

    fn should_stop(&self, state: &State) -> bool {
        let c = &state.container;
        c.global_err() < self.config.threshold(c.total_value_fine())
            || self.evals.load(Ordering::Relaxed) >= self.config.eval_budget
    }

    fn worker(&self, idx: usize) {
        let max_task = self.config.max_task;
        let per_rect = self.pair.evals_per_rect();
        let mut local = Vec::with_capacity(max_task);
        let mut children = Vec::with_capacity(4 * max_task);

        while !self.done.load(Ordering::Acquire) {
            {
                let mut st = self.state.lock().unwrap();
                if st.in_flight > 0 {
                    // The rest of the heap is already within target, so only
                    // the tasks in flight decide whether more work is needed.
                    let rest = st.container.global_err() - st.in_flight_err;
                    if rest < self.config.threshold(st.container.total_value_fine()) {
                        drop(st);
                        std::thread::yield_now();
                        continue;
                    }
                }
                st.container.extract_bulk_into(max_task, &mut local);
                if local.is_empty() {
                    // Everything is in flight with other workers.
                    if self.should_stop(&st) {
                        self.done.store(true, Ordering::Release);
                    }
                    drop(st);
                    std::thread::yield_now();
                    continue;
                }
                st.in_flight += local.len();
                st.in_flight_err += local.iter().map(|t| t.err).sum::<f64>();
            }

            if let Some(t) = local.iter().find(|t| t.domain.min_side() < MIN_SIDE) {
                self.fail(Error::Singularity {
                    member: t.id,
                    domain: t.domain,
                    err: t.err,
                });
                return;
            }

            children.clear();
            for t in &local {
                match refine_with(t, self.members[t.id], &self.pair) {
                    Ok(kids) => children.extend_from_slice(&kids),
                    Err(e) => {
                        self.fail(e);
                        return;
                    }
                }
            }
            let spent = 4 * per_rect * local.len() as u64;

            let mut st = self.state.lock().unwrap();
            st.container.commit(&local, &children);
            st.in_flight -= local.len();
            st.in_flight_err = if st.in_flight == 0 {
                0.0
            } else {
                st.in_flight_err - local.iter().map(|t| t.err).sum::<f64>()
            };
            st.refinements += local.len() as u64;
            for t in &local {
                st.member_evals[t.id] += 4 * per_rect;
            }
            if let Some(trace) = st.trace.as_mut() {
                let after_done = self.done.load(Ordering::Acquire);
                trace.extend(local.iter().map(|t| Refinement {
                    member: t.id,
                    domain: t.domain,
                    err: t.err,
                    worker: idx,
                    after_done,
                }));
            }
            self.evals.fetch_add(spent, Ordering::Relaxed);
            // The ledger makes this O(1), so every worker checks; a starved
            // coordinator would otherwise let the others run on unbounded.
            if self.should_stop(&st) {
                self.done.store(true, Ordering::Release);
            }
        }
    }
}

fn drive(
    members: &[&dyn Integrand],
    domain: Rectangle,
    config: &AdaptiveConfig,
    trace: Option<&mut RefinementTrace>,
) -> Result<FamilyResult> {
    config.validate()?;
    let pair = make_pair(config.n)?;
    let per_rect = pair.evals_per_rect();
    let container = init_members(members, domain, &pair)?;

    let shared = Shared {
        members,
        pair,
        config: *config,
        state: Mutex::new(State {
            container,
            in_flight: 0,
            in_flight_err: 0.0,
            member_evals: vec![per_rect; members.len()],
            refinements: 0,
            trace: trace.as_ref().map(|_| Vec::new()),
        }),
        done: AtomicBool::new(false),
        evals: AtomicU64::new(per_rect * members.len() as u64),
        failure: Mutex::new(None),
    };

    let converged = loop {
        {
            let mut st = shared.state.lock().unwrap();
            // Quiescent point: nothing is in flight.
            st.container.resync();
            let c = &st.container;
            if c.global_err() < config.threshold(c.total_value_fine()) {
                break true;
            }
            if shared.evals.load(Ordering::Relaxed) >= config.eval_budget {
                break false;
            }
        }
        shared.done.store(false, Ordering::Release);
        if config.workers == 1 {
            shared.worker(0);
        } else {
            std::thread::scope(|s| {
                for idx in 1..config.workers {
                    let sh = &shared;
                    s.spawn(move || sh.worker(idx));
                }
                shared.worker(0);
            });
        }
        if let Some(e) = shared.failure.lock().unwrap().take() {
            return Err(e);
        }
    };

    let state = shared.state.into_inner().unwrap();
    let global_err = state.container.global_err();
    let threshold = config.threshold(state.container.total_value_fine());
    let task_count = state.container.len();
    let mut sums = vec![CompensatedSum::default(); members.len()];
    for t in state.container.into_tasks() {
        sums[t.id].add(t.val_2n);
    }
    if let (Some(out), Some(events)) = (trace, state.trace) {
        out.refinements = events;
    }
    Ok(FamilyResult {
        values: sums.iter().map(CompensatedSum::value).collect(),
        global_err,
        threshold,
        eval_count: shared.evals.load(Ordering::Relaxed),
        member_evals: state.member_evals,
        task_count,
        refinements: state.refinements,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constants_resolve_without_refinement() {
        let fam = IntegrandFamily::new(Rectangle::square(1.0).unwrap())
            .with("one", |_: f64, _: f64| 1.0)
            .with("two", |_: f64, _: f64| 2.0);
        let pair = make_pair(4).unwrap();
        let c = init_container(&fam, &pair).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.global_err() < 1e-13);

        let r = run_adaptive(&fam, &AdaptiveConfig::absolute(1e-10, 4)).unwrap();
        assert!((r.values[0] - 4.0).abs() < 1e-14);
        assert!((r.values[1] - 8.0).abs() < 1e-14);
        assert_eq!(r.refinements, 0);
        assert_eq!(r.eval_count, 2 * 81);
        assert!(r.converged);
    }

    #[test]
    fn constant_on_brillouin_zone() {
        let fam = IntegrandFamily::new(Rectangle::brillouin_zone()).with("c", |_: f64, _: f64| 1.0);
        for eps in [1e-3, 1e-12] {
            let r = run_adaptive(&fam, &AdaptiveConfig::absolute(eps, 4)).unwrap();
            assert!((r.values[0] - 4.0 * PI * PI).abs() < 1e-12);
            assert_eq!(r.eval_count, 81);
        }
    }

    #[test]
    fn quadratic_is_exact() {
        let fam = IntegrandFamily::new(Rectangle::square(1.0).unwrap())
            .with("x2+y2", |x: f64, y: f64| x * x + y * y);
        let r = run_adaptive(&fam, &AdaptiveConfig::absolute(1e-10, 4)).unwrap();
        assert!((r.values[0] - 8.0 / 3.0).abs() < 1e-14);
        assert!(r.converged);
        assert_eq!(r.refinements, 0);
    }

    #[test]
    fn refine_splits_into_quadrants() {
        let fam = IntegrandFamily::new(Rectangle::new(0.0, 1.0, 0.0, 1.0).unwrap())
            .with("c", |_: f64, _: f64| 3.0);
        let pair = make_pair(4).unwrap();
        let mut c = init_container(&fam, &pair).unwrap();
        let parent = c.extract_bulk(1)[0];
        let kids = refine_task(&parent, &fam, &pair).unwrap();
        let s: f64 = kids.iter().map(|k| k.val_2n).sum();
        assert!((s - parent.val_2n).abs() < 1e-15);
        assert!(kids.iter().all(|k| k.err < 1e-15 && k.id == 0));
        assert_eq!(kids[3].domain, Rectangle::new(0.5, 1.0, 0.5, 1.0).unwrap());
    }

    #[test]
    fn empty_family_and_bad_config_are_rejected() {
        let fam = IntegrandFamily::new(Rectangle::square(1.0).unwrap());
        assert!(matches!(
            run_adaptive(&fam, &AdaptiveConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
        let fam = fam.with("c", |_: f64, _: f64| 1.0);
        for cfg in [
            AdaptiveConfig {
                n: 3,
                ..Default::default()
            },
            AdaptiveConfig {
                epsilon: 0.0,
                ..Default::default()
            },
            AdaptiveConfig {
                max_task: 0,
                ..Default::default()
            },
            AdaptiveConfig {
                workers: 0,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                run_adaptive(&fam, &cfg),
                Err(Error::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn non_integrable_member_is_diagnosed() {
        // 1/r^3 blows up at the origin, which is a corner of every refinement
        // of this domain, and is never sampled exactly.
        let fam = IntegrandFamily::new(Rectangle::new(0.0, 1.0, 0.0, 1.0).unwrap())
            .with("ok", |_: f64, _: f64| 1.0)
            .with("bad", |x: f64, y: f64| {
                let r2 = x * x + y * y;
                if r2 == 0.0 {
                    0.0
                } else {
                    r2.powf(-1.5)
                }
            });
        match run_adaptive(&fam, &AdaptiveConfig::absolute(1e-8, 2)) {
            Err(Error::Singularity { member, .. }) => assert_eq!(member, 1),
            other => panic!("expected a singularity diagnostic, got {other:?}"),
        }
    }

    #[test]
    fn nan_member_is_reported() {
        let fam = IntegrandFamily::new(Rectangle::square(1.0).unwrap())
            .with("ok", |_: f64, _: f64| 1.0)
            .with("nan", |x: f64, _: f64| if x > 0.9 { f64::NAN } else { 0.0 });
        match run_adaptive(&fam, &AdaptiveConfig::absolute(1e-8, 4)) {
            Err(Error::EvaluationFailure { member, .. }) => assert_eq!(member, Some(1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn budget_exhaustion_is_not_silent() {
        let fam = IntegrandFamily::new(Rectangle::square(1.0).unwrap())
            .with("peak", |x: f64, y: f64| (-400.0 * (x * x + y * y)).exp());
        let cfg = AdaptiveConfig::absolute(1e-14, 4).with_eval_budget(2000);
        let r = run_adaptive(&fam, &cfg).unwrap();
        assert!(!r.converged);
        assert!(r.eval_count >= 2000);
        assert!(r.values[0].is_finite());
    }
}
