use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::{check_oracle, ProblemParams};
use crate::error::{OdroError, Result};
use crate::problem::Problem;
use crate::stability::spectral_radius;
use crate::types::{ResidualField, StateVector};

/// `x ← A·x + b` with `ρ(A) > 1`; steady state `x* = (I − A)⁻¹b`.
#[derive(Debug, Clone)]
pub struct LinearMapProblem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    x0: StateVector,
    fixed_point: StateVector,
}

impl LinearMapProblem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, x0: Option<StateVector>) -> Result<Self> {
        let n = b.len();
        if a.nrows() != n || a.ncols() != n || n == 0 {
            return Err(OdroError::InvalidParameter {
                name: "a".into(),
                reason: format!("expected a {n}x{n} matrix, got {}x{}", a.nrows(), a.ncols()),
            });
        }
        let x0 = x0.unwrap_or_else(|| StateVector::zeros(n));
        if x0.n_dof() != n {
            return Err(OdroError::DimensionMismatch {
                expected: n,
                actual: x0.n_dof(),
            });
        }
        let radius = spectral_radius(&a);
        if !(radius > 1.0) {
            return Err(OdroError::InstabilityPrecondition(format!(
                "linear_map needs spectral radius rho(A) > 1, got {radius}"
            )));
        }
        let lhs = DMatrix::identity(n, n) - &a;
        let xstar = lhs
            .lu()
            .solve(&b)
            .ok_or_else(|| OdroError::InvalidParameter {
                name: "a".into(),
                reason: "I - A is singular, no unique fixed point".into(),
            })?;
        let fixed_point = StateVector::new(xstar.iter().copied().collect());
        let problem = Self {
            a,
            b,
            x0,
            fixed_point,
        };
        let scale = problem.a.amax() * problem.fixed_point.max_abs() + problem.b.amax();
        check_oracle(&problem, &problem.fixed_point, scale)?;
        Ok(problem)
    }

    /// `A = diag(1.2, 0.5)`, `b = (−0.2, 0.5)`, so `x* = (1, 1)`; starts at 0.
    pub fn paper_default() -> Self {
        Self::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.2, 0.5])),
            DVector::from_vec(vec![-0.2, 0.5]),
            None,
        )
        .expect("default linear map is valid")
    }

    /// Random `n×n` map rescaled to spectral radius `radius`.
    pub fn random(n: usize, radius: f64, seed: u64) -> Result<Self> {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let rho = spectral_radius(&a);
        let a = a * (radius / rho);
        let b = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        Self::new(a, b, None)
    }

    pub(super) fn from_params(params: &ProblemParams) -> Result<Self> {
        let x0 = params.vector("x0")?.map(StateVector::new);
        let problem = match (params.matrix("a")?, params.get::<usize>("n")?) {
            (Some(rows), _) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(OdroError::InvalidParameter {
                        name: "a".into(),
                        reason: "matrix rows must all have the same length as the row count".into(),
                    });
                }
                let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
                let b = params
                    .vector("b")?
                    .ok_or_else(|| OdroError::InvalidParameter {
                        name: "b".into(),
                        reason: "required when `a` is given".into(),
                    })?;
                Self::new(a, DVector::from_vec(b), x0)?
            }
            (None, Some(n)) => {
                let radius = params.get_or("radius", 1.2)?;
                let seed = params.get_or("seed", 0u64)?;
                let mut p = Self::random(n, radius, seed)?;
                if let Some(x0) = x0 {
                    p = Self::new(p.a, p.b, Some(x0))?;
                }
                p
            }
            (None, None) => {
                let p = Self::paper_default();
                match x0 {
                    Some(x0) => Self::new(p.a, p.b, Some(x0))?,
                    None => p,
                }
            }
        };
        Ok(problem)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn fixed_point(&self) -> &StateVector {
        &self.fixed_point
    }

    fn apply(&self, x: &StateVector) -> DVector<f64> {
        &self.a * DVector::from_column_slice(x.values()) + &self.b
    }
}

impl Problem for LinearMapProblem {
    fn name(&self) -> &str {
        "linear_map"
    }

    fn n_dof(&self) -> usize {
        self.b.len()
    }

    fn n_cells(&self) -> usize {
        self.b.len()
    }

    fn initial_state(&self) -> StateVector {
        self.x0.clone()
    }

    fn step(&self, state: &StateVector) -> StateVector {
        StateVector::new(self.apply(state).iter().copied().collect())
    }

    fn residual(&self, state: &StateVector) -> ResidualField {
        let ax = self.apply(state);
        ResidualField::scalar(ax.iter().zip(state.iter()).map(|(y, x)| y - x).collect())
    }

    fn oracle_steady_state(&self) -> Option<StateVector> {
        Some(self.fixed_point.clone())
    }
}
