//! Desk-scale problems with known steady states whose plain iteration does
//! not converge: two physical-instability analogs (an unstable linear map and
//! the Lorenz system) and two PDE analogs (Chafee-Infante reaction-diffusion
//! and the explicit heat equation above its CFL limit).

mod chafee_infante;
mod heat_cfl;
mod linear_map;
mod lorenz;

use std::collections::BTreeMap;
use std::str::FromStr;

pub use chafee_infante::ChafeeInfanteProblem;
pub use heat_cfl::HeatCflProblem;
pub use linear_map::LinearMapProblem;
pub use lorenz::{LorenzProblem, BETA, RHO_HOPF, SIGMA};

use crate::error::{OdroError, Result};
use crate::problem::Problem;
use crate::residual::state_r_total;
use crate::types::StateVector;

pub const PROBLEM_NAMES: [&str; 4] = ["linear_map", "lorenz", "chafee_infante", "heat_cfl"];

/// `key=value` problem parameters, as given on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProblemParams(BTreeMap<String, String>);

impl ProblemParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.insert(key, value);
        self
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    /// Parses `key=value`.
    pub fn insert_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| OdroError::InvalidParameter {
                name: pair.to_string(),
                reason: "expected key=value".into(),
            })?;
        self.insert(k.trim(), v.trim());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| OdroError::InvalidParameter {
                    name: key.to_string(),
                    reason: format!("cannot parse `{s}`"),
                }),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list of reals.
    pub fn vector(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key).map(|s| parse_list(key, s)).transpose()
    }

    /// Rows separated by `;`, entries by `,`.
    pub fn matrix(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>> {
        self.raw(key)
            .map(|s| s.split(';').map(|row| parse_list(key, row)).collect())
            .transpose()
    }

    fn reject_unknown(&self, problem: &str, allowed: &[&str]) -> Result<()> {
        match self.0.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(OdroError::InvalidParameter {
                name: k.clone(),
                reason: format!(
                    "not a parameter of {problem} (allowed: {})",
                    allowed.join(", ")
                ),
            }),
            None => Ok(()),
        }
    }
}

fn parse_list(key: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| OdroError::InvalidParameter {
                    name: key.to_string(),
                    reason: format!("cannot parse `{}` as a number", t.trim()),
                })
        })
        .collect()
}

/// Builds a problem by name, checking its instability precondition and that
/// its oracle steady state really is one.
pub fn make_problem(name: &str, params: &ProblemParams) -> Result<Box<dyn Problem>> {
    let problem: Box<dyn Problem> = match name {
        "linear_map" => {
            params.reject_unknown(name, &["a", "b", "x0", "n", "radius", "seed"])?;
            Box::new(LinearMapProblem::from_params(params)?)
        }
        "lorenz" => {
            params.reject_unknown(name, &["rho", "dt", "x0", "seed"])?;
            Box::new(LorenzProblem::from_params(params)?)
        }
        "chafee_infante" => {
            params.reject_unknown(name, &["m", "lambda", "dt_factor", "amplitude", "seed"])?;
            Box::new(ChafeeInfanteProblem::from_params(params)?)
        }
        "heat_cfl" => {
            params.reject_unknown(name, &["m", "rr", "seed"])?;
            Box::new(HeatCflProblem::from_params(params)?)
        }
        other => return Err(OdroError::UnknownProblem(other.to_string())),
    };
    Ok(problem)
}

/// Fails unless `r_total(u*) < 1e-12 · scale`.
pub(crate) fn check_oracle<P: Problem + ?Sized>(
    problem: &P,
    oracle: &StateVector,
    scale: f64,
) -> Result<()> {
    let r = state_r_total(problem, oracle);
    let limit = 1e-12 * scale.max(1.0);
    if r < limit {
        Ok(())
    } else {
        Err(OdroError::Config(format!(
            "{}: oracle steady state has r_total {r:e} (limit {limit:e})",
            problem.name()
        )))
    }
}

/// Interior nodes of a uniform grid on [0, 1].
pub(crate) fn interior_nodes(m: usize) -> impl Iterator<Item = f64> {
    let dx = 1.0 / (m + 1) as f64;
    (1..=m).map(move |j| j as f64 * dx)
}
