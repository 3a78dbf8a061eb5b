use std::f64::consts::PI;

use super::{check_oracle, interior_nodes, ProblemParams};
use crate::error::{OdroError, Result};
use crate::problem::Problem;
use crate::types::{ResidualField, StateVector};

/// `u_t = u_xx + λ(u − u³)` on [0, 1] with `u(0) = u(1) = 0`, central
/// differences on `m` interior nodes, explicit Euler in pseudo-time.
///
/// `u ≡ 0` is steady for every λ and linearly unstable once `λ > π²`.
#[derive(Debug, Clone)]
pub struct ChafeeInfanteProblem {
    m: usize,
    lambda: f64,
    dx: f64,
    dt: f64,
    amplitude: f64,
}

impl ChafeeInfanteProblem {
    pub fn new(m: usize, lambda: f64) -> Result<Self> {
        Self::with_time_step(m, lambda, 0.4)
    }

    /// `dt = dt_factor · Δx²`; explicit Euler is stable for `dt_factor < 1/2`
    /// up to the reaction term.
    pub fn with_time_step(m: usize, lambda: f64, dt_factor: f64) -> Result<Self> {
        if m < 3 {
            return Err(OdroError::InvalidParameter {
                name: "m".into(),
                reason: format!("need at least 3 interior nodes, got {m}"),
            });
        }
        if !(lambda > PI * PI) {
            return Err(OdroError::InstabilityPrecondition(format!(
                "chafee_infante needs lambda > pi^2 = {:.6} so u = 0 is unstable, got {lambda}",
                PI * PI
            )));
        }
        if !(dt_factor > 0.0) {
            return Err(OdroError::InvalidParameter {
                name: "dt_factor".into(),
                reason: format!("must be positive, got {dt_factor}"),
            });
        }
        let dx = 1.0 / (m + 1) as f64;
        let p = Self {
            m,
            lambda,
            dx,
            dt: dt_factor * dx * dx,
            amplitude: 1e-3,
        };
        check_oracle(&p, &StateVector::zeros(m), 1.0 / (dx * dx))?;
        Ok(p)
    }

    pub(super) fn from_params(params: &ProblemParams) -> Result<Self> {
        let mut p = Self::with_time_step(
            params.get_or("m", 63)?,
            params.get_or("lambda", 20.0)?,
            params.get_or("dt_factor", 0.4)?,
        )?;
        p.amplitude = params.get_or("amplitude", p.amplitude)?;
        Ok(p)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }
}

impl Default for ChafeeInfanteProblem {
    fn default() -> Self {
        Self::new(63, 20.0).expect("default Chafee-Infante parameters are valid")
    }
}

impl Problem for ChafeeInfanteProblem {
    fn name(&self) -> &str {
        "chafee_infante"
    }

    fn n_dof(&self) -> usize {
        self.m
    }

    fn n_cells(&self) -> usize {
        self.m
    }

    /// `amplitude · sin(πx)`.
    fn initial_state(&self) -> StateVector {
        StateVector::new(
            interior_nodes(self.m)
                .map(|x| self.amplitude * (PI * x).sin())
                .collect(),
        )
    }

    fn step(&self, state: &StateVector) -> StateVector {
        let r = self.residual(state);
        StateVector::new(
            state
                .iter()
                .zip(r.values())
                .map(|(u, r)| u + self.dt * r)
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
                let right = if j + 1 == m { 0.0 } else { u[j + 1] };
                (left - 2.0 * u[j] + right) * inv_dx2 + self.lambda * (u[j] - u[j] * u[j] * u[j])
            })
            .collect();
        ResidualField::scalar(values)
    }

    fn oracle_steady_state(&self) -> Option<StateVector> {
        Some(StateVector::zeros(self.m))
    }
}
