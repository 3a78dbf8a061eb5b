use super::{check_oracle, interior_nodes, ProblemParams};
use crate::error::{OdroError, Result};
use crate::problem::Problem;
use crate::types::{ResidualField, StateVector};

/// `u_t = u_xx` on [0, 1] with `u(0) = 0`, `u(1) = 1`, marched with explicit
/// Euler at mesh ratio `rr = dt/Δx² > 1/2`, beyond the scheme's stability
/// limit. The steady state `u = x` is exact on the grid.
#[derive(Debug, Clone)]
pub struct HeatCflProblem {
    m: usize,
    rr: f64,
    dx: f64,
}

impl HeatCflProblem {
    pub fn new(m: usize, rr: f64) -> Result<Self> {
        if m < 3 {
            return Err(OdroError::InvalidParameter {
                name: "m".into(),
                reason: format!("need at least 3 interior nodes, got {m}"),
            });
        }
        if !(rr > 0.5) {
            return Err(OdroError::InstabilityPrecondition(format!(
                "heat_cfl needs mesh ratio rr > 0.5 for an unstable explicit scheme, got {rr}"
            )));
        }
        let dx = 1.0 / (m + 1) as f64;
        let p = Self { m, rr, dx };
        check_oracle(&p, &p.exact_solution(), 1.0 / (dx * dx))?;
        Ok(p)
    }

    pub(super) fn from_params(params: &ProblemParams) -> Result<Self> {
        Self::new(params.get_or("m", 63)?, params.get_or("rr", 0.6)?)
    }

    pub fn mesh_ratio(&self) -> f64 {
        self.rr
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// `u_m = m/(M + 1)`.
    pub fn exact_solution(&self) -> StateVector {
        StateVector::new(interior_nodes(self.m).collect())
    }

    /// Per-step amplification `|1 − 4·rr·sin²(kπΔx/2)|` of Fourier mode `k`.
    pub fn amplification(&self, k: usize) -> f64 {
        let s = (k as f64 * std::f64::consts::PI * self.dx / 2.0).sin();
        (1.0 - 4.0 * self.rr * s * s).abs()
    }
}

impl Default for HeatCflProblem {
    fn default() -> Self {
        Self::new(63, 0.6).expect("default heat parameters are valid")
    }
}

impl Problem for HeatCflProblem {
    fn name(&self) -> &str {
        "heat_cfl"
    }

    fn n_dof(&self) -> usize {
        self.m
    }

    fn n_cells(&self) -> usize {
        self.m
    }

    fn initial_state(&self) -> StateVector {
        StateVector::zeros(self.m)
    }

    fn step(&self, state: &StateVector) -> StateVector {
        let dt = self.rr * self.dx * self.dx;
        let r = self.residual(state);
        StateVector::new(
            state
                .iter()
                .zip(r.values())
                .map(|(u, r)| u + dt * r)
                .collect(),
        )
    }

    fn residual(&self, state: &StateVector) -> ResidualField {
        let inv_dx2 = 1.0 / (self.dx * self.dx);
        let u = state.values();
        let m = self.m;
        let values = (0..m)
            .map(|j| {
                let left = if j == 0 { 0.0 } else { u[j - 1] };
                let right = if j + 1 == m { 1.0 } else { u[j + 1] };
                (left - 2.0 * u[j] + right) * inv_dx2
            })
            .collect();
        ResidualField::scalar(values)
    }

    fn oracle_steady_state(&self) -> Option<StateVector> {
        Some(self.exact_solution())
    }
}
