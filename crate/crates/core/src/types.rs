//! Domain types shared by every module: states, residual fields, run
//! configuration and convergence bookkeeping.

use std::fmt;
use std::ops::{Deref, DerefMut};

use crate::error::{OdroError, Result};

/// Discrete solution vector of a problem, flattened.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n_dof: usize) -> Self {
        Self(vec![0.0; n_dof])
    }

    pub fn n_dof(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `‖self - other‖∞`.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl From<Vec<f64>> for StateVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

impl Deref for StateVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for StateVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Per-cell residual vectors, stored cell-major (`n_cells × n_eq`).
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    values: Vec<f64>,
    n_cells: usize,
    n_eq: usize,
}

impl ResidualField {
    pub fn new(values: Vec<f64>, n_cells: usize, n_eq: usize) -> Result<Self> {
        if n_cells == 0 || n_eq == 0 {
            return Err(OdroError::Config(
                "residual field needs at least one cell and one equation".into(),
            ));
        }
        if values.len() != n_cells * n_eq {
            return Err(OdroError::DimensionMismatch {
                expected: n_cells * n_eq,
                actual: values.len(),
            });
        }
        Ok(Self {
            values,
            n_cells,
            n_eq,
        })
    }

    /// One scalar equation per cell, as used by ODE and scalar PDE problems.
    pub fn scalar(values: Vec<f64>) -> Self {
        let n_cells = values.len();
        Self {
            values,
            n_cells,
            n_eq: 1,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_eq(&self) -> usize {
        self.n_eq
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell(&self, m: usize) -> &[f64] {
        &self.values[m * self.n_eq..(m + 1) * self.n_eq]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_eq)
    }

    /// `max_m ‖R_m‖₂`.
    pub fn max_cell_norm(&self) -> f64 {
        self.cells()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// Parameters of one ODRO run.
#[derive(Debug, Clone, PartialEq)]
pub struct OdroConfig {
    /// N: snapshots per cycle.
    pub n_snapshots: usize,
    /// K: iterations between stored snapshots.
    pub interval: usize,
    /// O: requested POD modes.
    pub n_modes: usize,
    pub budget_divisor: usize,
    pub convergence_tol: f64,
    pub max_cycles: usize,
    pub divergence_factor: f64,
    pub rank_tol: f64,
    pub rng_seed: u64,
}

impl Default for OdroConfig {
    fn default() -> Self {
        Self {
            n_snapshots: 5,
            interval: 80,
            n_modes: 5,
            budget_divisor: 10,
            convergence_tol: 1e-10,
            max_cycles: 100,
            divergence_factor: 1e6,
            rank_tol: 1e-8,
            rng_seed: 0,
        }
    }
}

impl OdroConfig {
    pub fn new(n_snapshots: usize, interval: usize, n_modes: usize) -> Self {
        Self {
            n_snapshots,
            interval,
            n_modes,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(OdroError::Config(msg));
        if self.n_snapshots < 2 {
            return fail(format!(
                "snapshots N must be >= 2, got {}",
                self.n_snapshots
            ));
        }
        if self.interval < 1 {
            return fail("interval K must be >= 1".into());
        }
        if self.n_modes < 1 {
            return fail("modes O must be >= 1".into());
        }
        if self.n_modes > self.n_snapshots {
            return fail(format!(
                "modes O = {} exceeds snapshots N = {}",
                self.n_modes, self.n_snapshots
            ));
        }
        if self.budget_divisor < 1 {
            return fail("budget divisor must be >= 1".into());
        }
        if !(self.convergence_tol > 0.0 && self.convergence_tol.is_finite()) {
            return fail(format!(
                "tolerance must be positive, got {}",
                self.convergence_tol
            ));
        }
        if self.max_cycles < 1 {
            return fail("max cycles must be >= 1".into());
        }
        if !(self.divergence_factor > 1.0) {
            return fail(format!(
                "divergence factor must exceed 1, got {}",
                self.divergence_factor
            ));
        }
        if !(self.rank_tol >= 0.0 && self.rank_tol < 1.0) {
            return fail(format!(
                "rank tolerance must lie in [0, 1), got {}",
                self.rank_tol
            ));
        }
        Ok(())
    }

    /// Objective evaluations allowed per optimization phase.
    pub fn budget(&self) -> usize {
        budget(self)
    }
}

/// `max(O + 2, ⌊N·K / divisor⌋)`: never smaller than a simplex plus one move.
pub fn budget(config: &OdroConfig) -> usize {
    let share = config.n_snapshots * config.interval / config.budget_divisor;
    share.max(config.n_modes + 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Iterate,
    Optimize,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Iterate => "iterate",
            Phase::Optimize => "optimize",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub iteration: u64,
    pub cycle: usize,
    pub phase: Phase,
    pub r_total: f64,
}
