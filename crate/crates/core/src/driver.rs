//! The ODRO outer loop: iterate and collect snapshots, build a POD basis,
//! minimize the residual in the subspace, restart from the result.

use crate::error::{OdroError, Result};
use crate::optimizer::{minimize, CostFunction, SimplexScale};
use crate::pod::{project, reconstruct, PodBasis, SnapshotBuffer};
use crate::problem::Problem;
use crate::residual::{state_r_total, Objective};
use crate::types::{ConvergenceRecord, OdroConfig, Phase, StateVector};

/// Initial simplex step relative to each coefficient's scale.
pub const SIMPLEX_RELATIVE_STEP: f64 = 0.2;

/// True iff `r_now` is non-finite or exceeds `divergence_factor × r_cycle_start`.
pub fn divergence_guard(r_now: f64, r_cycle_start: f64, config: &OdroConfig) -> bool {
    !r_now.is_finite() || r_now > config.divergence_factor * r_cycle_start
}

/// How a cycle chose its end state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acceptance {
    /// The reconstructed optimum.
    Optimized,
    /// The optimum was worse than the best snapshot, which was kept instead.
    BestSnapshot,
    /// Snapshots were identical after centering; the best snapshot was kept.
    NoModes,
    /// The tolerance was reached while iterating; no optimization ran.
    ConvergedWhileIterating,
}

#[derive(Debug, Clone)]
pub struct CycleOutcome {
    pub state: StateVector,
    pub r_total: f64,
    pub records: Vec<ConvergenceRecord>,
    pub iterations: u64,
    pub objective_evals: usize,
    pub snapshots: usize,
    pub guard_triggered: bool,
    pub acceptance: Acceptance,
}

impl CycleOutcome {
    pub fn optimized(&self) -> bool {
        self.acceptance != Acceptance::ConvergedWhileIterating
    }
}

/// One ODRO cycle starting from `state`.
///
/// `iteration` is the global iteration counter, advanced by the steps taken
/// here; `cycle` tags the emitted records.
pub fn run_cycle<P: Problem + ?Sized>(
    problem: &P,
    state: &StateVector,
    config: &OdroConfig,
    cycle: usize,
    iteration: &mut u64,
) -> Result<CycleOutcome> {
    if !state.is_finite() {
        return Err(OdroError::Config(
            "cycle started from a non-finite state".into(),
        ));
    }
    if state.n_dof() != problem.n_dof() {
        return Err(OdroError::DimensionMismatch {
            expected: problem.n_dof(),
            actual: state.n_dof(),
        });
    }
    let (n, k) = (config.n_snapshots, config.interval);
    let r_start = state_r_total(problem, state);
    let mut buffer = SnapshotBuffer::new(n);
    let mut snapshot_r = Vec::with_capacity(n);
    let mut records = Vec::with_capacity(n * k + 1);
    let mut u = state.clone();
    let mut steps = 0usize;
    let mut guard_triggered = false;

    while steps < n * k {
        u = problem.step(&u);
        steps += 1;
        *iteration += 1;
        let r = state_r_total(problem, &u);
        records.push(ConvergenceRecord {
            iteration: *iteration,
            cycle,
            phase: Phase::Iterate,
            r_total: r,
        });
        if steps % k == 0 && u.is_finite() {
            buffer.push(u.clone(), *iteration)?;
            snapshot_r.push(r);
        }
        if r < config.convergence_tol {
            return Ok(CycleOutcome {
                state: u,
                r_total: r,
                records,
                iterations: steps as u64,
                objective_evals: 0,
                snapshots: buffer.len(),
                guard_triggered,
                acceptance: Acceptance::ConvergedWhileIterating,
            });
        }
        if divergence_guard(r, r_start, config) {
            guard_triggered = true;
            break;
        }
    }

    if buffer.len() < 2 {
        return Err(OdroError::DivergedTooFast {
            snapshots: buffer.len(),
            interval: k,
        });
    }

    let (best_idx, best_r) = snapshot_r
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least two snapshots");
    let best_snapshot = || {
        buffer
            .states()
            .nth(best_idx)
            .cloned()
            .expect("index in range")
    };

    let budget = cycle_budget(config, steps);
    let (end_state, end_r, evals, acceptance) =
        match PodBasis::from_snapshots(&buffer, config.n_modes, config.rank_tol) {
            Err(OdroError::NoUsableModes) => (best_snapshot(), best_r, 0, Acceptance::NoModes),
            Err(e) => return Err(e),
            Ok(basis) => {
                let last = buffer.last().expect("non-empty buffer");
                let xi0 = project(&basis, last)?;
                let guards = basis.coefficient_scales();
                let floor = 1e-8 * guards.iter().copied().fold(0.0, f64::max);
                let scale = SimplexScale {
                    relative_step: SIMPLEX_RELATIVE_STEP,
                    guards,
                    floor: if floor > 0.0 { floor } else { 1e-8 },
                };
                let mut objective = Objective::new(problem, &basis);
                let min = minimize(&mut objective, &xi0, budget, &scale)?;
                let evals = objective.eval_count();
                let candidate = reconstruct(&basis, &min.xi)?;
                let r_candidate = state_r_total(problem, &candidate);
                if r_candidate <= best_r {
                    (candidate, r_candidate, evals, Acceptance::Optimized)
                } else {
                    (best_snapshot(), best_r, evals, Acceptance::BestSnapshot)
                }
            }
        };

    records.push(ConvergenceRecord {
        iteration: *iteration,
        cycle,
        phase: Phase::Optimize,
        r_total: end_r,
    });
    Ok(CycleOutcome {
        state: end_state,
        r_total: end_r,
        records,
        iterations: steps as u64,
        objective_evals: evals,
        snapshots: buffer.len(),
        guard_triggered,
        acceptance,
    })
}

/// Evaluation budget for a cycle that ran `steps` iterations; equals
/// `config.budget()` for a full cycle and shrinks with an early stop.
pub fn cycle_budget(config: &OdroConfig, steps: usize) -> usize {
    (steps / config.budget_divisor).max(config.n_modes + 2)
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_state: StateVector,
    pub final_r_total: f64,
    pub initial_r_total: f64,
    pub converged: bool,
    pub cycles_used: usize,
    pub total_iterations: u64,
    pub total_objective_evals: usize,
    pub guard_triggers: usize,
    pub history: Vec<ConvergenceRecord>,
}

impl RunResult {
    /// Objective evaluations per solver iteration.
    pub fn eval_share(&self) -> f64 {
        if self.total_iterations == 0 {
            0.0
        } else {
            self.total_objective_evals as f64 / self.total_iterations as f64
        }
    }
}

/// Runs ODRO cycles from the problem's initial state until `r_total` drops
/// below the tolerance or `max_cycles` optimizations have run.
pub fn run_odro<P: Problem + ?Sized>(problem: &P, config: &OdroConfig) -> Result<RunResult> {
    run_odro_from(problem, problem.initial_state(), config)
}

pub fn run_odro_from<P: Problem + ?Sized>(
    problem: &P,
    start: StateVector,
    config: &OdroConfig,
) -> Result<RunResult> {
    config.validate()?;
    if !start.is_finite() {
        return Err(OdroError::Config("initial state is not finite".into()));
    }
    let initial_r_total = state_r_total(problem, &start);
    let mut result = RunResult {
        final_state: start,
        final_r_total: initial_r_total,
        initial_r_total,
        converged: initial_r_total < config.convergence_tol,
        cycles_used: 0,
        total_iterations: 0,
        total_objective_evals: 0,
        guard_triggers: 0,
        history: Vec::new(),
    };
    let mut iteration = 0u64;
    let mut cycle = 0;
    while !result.converged && result.cycles_used < config.max_cycles {
        cycle += 1;
        let outcome = run_cycle(problem, &result.final_state, config, cycle, &mut iteration)?;
        result.total_iterations += outcome.iterations;
        result.total_objective_evals += outcome.objective_evals;
        result.guard_triggers += usize::from(outcome.guard_triggered);
        result.cycles_used += usize::from(outcome.optimized());
        result.history.extend(outcome.records);
        result.final_state = outcome.state;
        result.final_r_total = outcome.r_total;
        result.converged = outcome.r_total < config.convergence_tol;
    }
    Ok(result)
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub final_state: StateVector,
    pub final_r_total: f64,
    pub initial_r_total: f64,
    pub converged: bool,
    /// The state became non-finite and iteration stopped.
    pub diverged: bool,
    pub total_iterations: u64,
    pub history: Vec<ConvergenceRecord>,
}

impl BaselineResult {
    /// Largest `r_total` seen, including the start.
    pub fn max_r_total(&self) -> f64 {
        self.history
            .iter()
            .map(|r| r.r_total)
            .fold(self.initial_r_total, f64::max)
    }

    pub fn min_r_total(&self) -> f64 {
        self.history
            .iter()
            .map(|r| r.r_total)
            .fold(self.initial_r_total, f64::min)
    }
}

/// Plain iteration for up to `iterations` steps, stopping early on
/// convergence or a non-finite state.
pub fn run_baseline<P: Problem + ?Sized>(
    problem: &P,
    iterations: u64,
    convergence_tol: f64,
) -> BaselineResult {
    let mut u = problem.initial_state();
    let initial_r_total = state_r_total(problem, &u);
    let mut r = initial_r_total;
    let mut history = Vec::new();
    let mut done = 0;
    while done < iterations && r >= convergence_tol && u.is_finite() {
        u = problem.step(&u);
        done += 1;
        r = state_r_total(problem, &u);
        history.push(ConvergenceRecord {
            iteration: done,
            cycle: 0,
            phase: Phase::Iterate,
            r_total: r,
        });
    }
    BaselineResult {
        diverged: !u.is_finite(),
        converged: r < convergence_tol,
        final_state: u,
        final_r_total: r,
        initial_r_total,
        total_iterations: done,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_problem, LinearMapProblem, LorenzProblem, ProblemParams};

    #[test]
    fn guard_examples() {
        let cfg = OdroConfig::default();
        assert!(divergence_guard(f64::NAN, 1.0, &cfg));
        assert!(divergence_guard(f64::INFINITY, 1.0, &cfg));
        assert!(!divergence_guard(1.0, 1.0, &cfg));
        assert!(divergence_guard(1e4, 1e-3, &cfg));
        assert!(!divergence_guard(1e2, 1e-3, &cfg));
    }

    #[test]
    fn cycle_budget_full_and_early() {
        let cfg = OdroConfig::default();
        assert_eq!(cycle_budget(&cfg, 400), cfg.budget());
        assert_eq!(cycle_budget(&cfg, 100), 10);
        assert_eq!(cycle_budget(&cfg, 3), 7);
    }

    #[test]
    fn steady_start_is_idempotent() {
        let p = LinearMapProblem::paper_default();
        let xstar = p.fixed_point().clone();
        let res = run_odro_from(&p, xstar.clone(), &OdroConfig::new(5, 10, 2)).unwrap();
        assert!(res.converged);
        assert_eq!(res.cycles_used, 0);
        assert_eq!(res.total_iterations, 0);
        assert_eq!(res.final_state, xstar);
    }

    /// A problem whose steady state is reached exactly but whose residual
    /// stays above tolerance: every snapshot coincides.
    struct Frozen;
    impl Problem for Frozen {
        fn name(&self) -> &str {
            "frozen"
        }
        fn n_dof(&self) -> usize {
            2
        }
        fn n_cells(&self) -> usize {
            2
        }
        fn initial_state(&self) -> StateVector {
            StateVector::new(vec![1.0, 2.0])
        }
        fn step(&self, s: &StateVector) -> StateVector {
            s.clone()
        }
        fn residual(&self, _: &StateVector) -> crate::types::ResidualField {
            crate::types::ResidualField::scalar(vec![1.0, 1.0])
        }
    }

    #[test]
    fn identical_snapshots_keep_state() {
        let mut it = 0;
        let start = Frozen.initial_state();
        let out = run_cycle(&Frozen, &start, &OdroConfig::new(3, 4, 2), 1, &mut it).unwrap();
        assert_eq!(out.acceptance, Acceptance::NoModes);
        assert_eq!(out.state, start);
        assert_eq!(out.objective_evals, 0);
        assert_eq!(it, 12);
    }

    #[test]
    fn linear_cycle_never_worse_than_snapshots() {
        // With N=5, K=10 the budget is 5 evaluations, far too few to undo the
        // 1.2^10 growth before the first snapshot; the cycle can only promise
        // the best snapshot.
        let p = LinearMapProblem::paper_default();
        let start = p.initial_state();
        let mut it = 0;
        let cfg = OdroConfig::new(5, 10, 2);
        let out = run_cycle(&p, &start, &cfg, 1, &mut it).unwrap();
        let snaps: Vec<f64> = out
            .records
            .iter()
            .filter(|r| r.iteration % 10 == 0 && r.phase == Phase::Iterate)
            .map(|r| r.r_total)
            .collect();
        assert_eq!(snaps.len(), 5);
        assert!(out.r_total <= snaps.iter().copied().fold(f64::INFINITY, f64::min));
        assert!(out.r_total < *snaps.last().unwrap());
        assert_eq!(out.records.len(), 51);
        assert_eq!(out.records.last().unwrap().phase, Phase::Optimize);
        assert!(out.objective_evals <= cfg.budget());
    }

    #[test]
    fn cycle_end_not_worse_than_snapshots() {
        let p = LorenzProblem::default();
        let cfg = OdroConfig::default();
        let mut state = p.initial_state();
        let mut it = 0;
        for c in 1..=5 {
            let out = run_cycle(&p, &state, &cfg, c, &mut it).unwrap();
            let snaps: Vec<f64> = out
                .records
                .iter()
                .filter(|r| r.phase == Phase::Iterate && r.iteration % cfg.interval as u64 == 0)
                .map(|r| r.r_total)
                .collect();
            let min = snaps.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(out.r_total <= min);
            state = out.state;
        }
    }

    #[test]
    fn violent_heat_triggers_guard_or_reports_divergence() {
        let p = make_problem("heat_cfl", &ProblemParams::new().with("rr", 2.0)).unwrap();
        let mut it = 0;
        let cfg = OdroConfig::default();
        match run_cycle(&p, &p.initial_state(), &cfg, 1, &mut it) {
            Ok(out) => assert!(out.guard_triggered),
            Err(e) => assert!(matches!(e, OdroError::DivergedTooFast { interval: 80, .. })),
        }
    }

    #[test]
    fn diverged_too_fast_names_interval() {
        let p = make_problem("heat_cfl", &ProblemParams::new().with("rr", 2.0)).unwrap();
        let mut cfg = OdroConfig::new(5, 400, 5);
        cfg.divergence_factor = 1e300;
        let mut it = 0;
        let err = run_cycle(&p, &p.initial_state(), &cfg, 1, &mut it).unwrap_err();
        assert!(matches!(
            err,
            OdroError::DivergedTooFast { interval: 400, .. }
        ));
        assert!(err.to_string().contains("--interval"));
    }

    #[test]
    fn baseline_linear_growth() {
        let p = LinearMapProblem::paper_default();
        let b = run_baseline(&p, 100, 1e-10);
        assert_eq!(b.total_iterations, 100);
        assert!(b.final_r_total / b.initial_r_total > 1e3);
        assert!(!b.converged && !b.diverged);
    }

    #[test]
    fn baseline_stops_on_blowup() {
        let p = make_problem("heat_cfl", &ProblemParams::new().with("rr", 2.0)).unwrap();
        let b = run_baseline(p.as_ref(), 100_000, 1e-10);
        assert!(b.diverged);
        assert!(b.total_iterations < 100_000);
    }

    #[test]
    fn run_records_are_consistent() {
        let p = LorenzProblem::default();
        let cfg = OdroConfig {
            max_cycles: 3,
            ..OdroConfig::default()
        };
        let res = run_odro(&p, &cfg).unwrap();
        let optimizes = res
            .history
            .iter()
            .filter(|r| r.phase == Phase::Optimize)
            .count();
        assert_eq!(optimizes, res.cycles_used);
        assert!(res
            .history
            .windows(2)
            .all(|w| w[0].iteration <= w[1].iteration));
        assert!(res.total_objective_evals <= res.cycles_used * cfg.budget());
        assert_eq!(
            res.total_iterations,
            res.history
                .iter()
                .filter(|r| r.phase == Phase::Iterate)
                .count() as u64
        );
    }
}
