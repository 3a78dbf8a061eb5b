use super::{check_oracle, ProblemParams};
use crate::error::{OdroError, Result};
use crate::problem::Problem;
use crate::types::{ResidualField, StateVector};

pub const SIGMA: f64 = 10.0;
pub const BETA: f64 = 8.0 / 3.0;
/// Subcritical Hopf point `σ(σ + β + 3)/(σ − β − 1)`; above it both
/// non-trivial equilibria are unstable.
pub const RHO_HOPF: f64 = SIGMA * (SIGMA + BETA + 3.0) / (SIGMA - BETA - 1.0);

/// Lorenz system marched to steady state with explicit Euler pseudo-time steps.
#[derive(Debug, Clone)]
pub struct LorenzProblem {
    rho: f64,
    dt: f64,
    x0: [f64; 3],
}

impl LorenzProblem {
    pub fn new(rho: f64, dt: f64) -> Result<Self> {
        if !(rho > RHO_HOPF) {
            return Err(OdroError::InstabilityPrecondition(format!(
                "lorenz needs rho > {RHO_HOPF:.4} for unstable equilibria, got {rho}"
            )));
        }
        if !(dt > 0.0) {
            return Err(OdroError::InvalidParameter {
                name: "dt".into(),
                reason: format!("must be positive, got {dt}"),
            });
        }
        let p = Self {
            rho,
            dt,
            x0: [1.0, 1.0, 1.0],
        };
        let [plus, minus] = p.equilibria();
        let scale = rho * plus.max_abs();
        check_oracle(&p, &plus, scale)?;
        check_oracle(&p, &minus, scale)?;
        Ok(p)
    }

    pub(super) fn from_params(params: &ProblemParams) -> Result<Self> {
        let mut p = Self::new(params.get_or("rho", 28.0)?, params.get_or("dt", 0.01)?)?;
        if let Some(x0) = params.vector("x0")? {
            let x0: [f64; 3] =
                x0.try_into()
                    .map_err(|v: Vec<f64>| OdroError::InvalidParameter {
                        name: "x0".into(),
                        reason: format!("expected 3 values, got {}", v.len()),
                    })?;
            p.x0 = x0;
        }
        Ok(p)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `C± = (±√(β(ρ−1)), ±√(β(ρ−1)), ρ − 1)`.
    pub fn equilibria(&self) -> [StateVector; 2] {
        let c = (BETA * (self.rho - 1.0)).sqrt();
        let z = self.rho - 1.0;
        [
            StateVector::new(vec![c, c, z]),
            StateVector::new(vec![-c, -c, z]),
        ]
    }

    fn rhs(&self, u: &[f64]) -> [f64; 3] {
        let (x, y, z) = (u[0], u[1], u[2]);
        [SIGMA * (y - x), x * (self.rho - z) - y, x * y - BETA * z]
    }
}

impl Default for LorenzProblem {
    fn default() -> Self {
        Self::new(28.0, 0.01).expect("default Lorenz parameters are valid")
    }
}

impl Problem for LorenzProblem {
    fn name(&self) -> &str {
        "lorenz"
    }

    fn n_dof(&self) -> usize {
        3
    }

    fn n_cells(&self) -> usize {
        3
    }

    fn initial_state(&self) -> StateVector {
        StateVector::new(self.x0.to_vec())
    }

    fn step(&self, state: &StateVector) -> StateVector {
        let f = self.rhs(state);
        StateVector::new(state.iter().zip(f).map(|(u, f)| u + self.dt * f).collect())
    }

    fn residual(&self, state: &StateVector) -> ResidualField {
        ResidualField::scalar(self.rhs(state).to_vec())
    }

    fn oracle_steady_state(&self) -> Option<StateVector> {
        let [plus, _] = self.equilibria();
        Some(plus)
    }
}
