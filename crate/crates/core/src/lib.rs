//! Online dimension reduction optimization (ODRO) for steady-state problems
//! whose plain iterative solver will not converge.
//!
//! A run alternates between the problem's own iterative solver and a
//! derivative-free minimization of the steady residual inside a POD subspace
//! spanned by recent iterates:
//!
//! 1. iterate, storing every `K`-th state until `N` snapshots exist;
//! 2. build a POD basis of the snapshots ([`pod`]);
//! 3. minimize the RMS residual over the mode coefficients with Nelder-Mead
//!    ([`residual`], [`optimizer`]) and restart from the result;
//! 4. repeat until the residual is below tolerance ([`driver`]).

// `!(x > bound)` is deliberate throughout: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod driver;
pub mod error;
pub mod optimizer;
pub mod pod;
pub mod problem;
pub mod problems;
pub mod residual;
pub mod stability;
pub mod types;

pub use driver::{
    divergence_guard, run_baseline, run_cycle, run_odro, run_odro_from, Acceptance, BaselineResult,
    CycleOutcome, RunResult,
};
pub use error::{OdroError, Result};
pub use optimizer::{
    adaptive_params, initial_simplex, minimize, CostFunction, EvalTracker, FnObjective, Minimum,
    NmParams, Simplex, SimplexScale, Termination,
};
pub use pod::{center, decompose, project, reconstruct, PodBasis, SnapshotBuffer};
pub use problem::Problem;
pub use problems::{
    make_problem, ChafeeInfanteProblem, HeatCflProblem, LinearMapProblem, LorenzProblem,
    ProblemParams,
};
pub use residual::{r_total, state_r_total, Objective};
pub use stability::{
    analyze, analyze_step_map, jacobian_fd, leading_spectrum, step_jacobian_fd, Classification,
    Convention, SpectrumReport,
};
pub use types::{budget, ConvergenceRecord, OdroConfig, Phase, ResidualField, StateVector};
