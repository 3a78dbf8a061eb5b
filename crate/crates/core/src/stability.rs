//! Linear stability of converged states from finite-difference Jacobians.
//!
//! Two views are exposed: eigenvalues of the residual Jacobian `∂R/∂u`
//! (unstable when a real part is positive) and of the step map `∂step/∂u`
//! (unstable when a modulus exceeds one).

use nalgebra::{Complex, DMatrix};

use crate::error::{OdroError, Result};
use crate::problem::Problem;
use crate::types::StateVector;

/// Largest problem size solved with a dense eigendecomposition.
pub const DENSE_LIMIT: usize = 512;
/// Distance from the stability boundary treated as marginal.
pub const MARGIN: f64 = 1e-8;

const SUBSPACE_SWEEPS: usize = 2000;
const SUBSPACE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Stable,
    Unstable,
    Marginal,
}

/// Which linearization a spectrum belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `∂R/∂u`; eigenvalues ordered by real part.
    ResidualJacobian,
    /// `∂step/∂u`; eigenvalues ordered by modulus.
    StepMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub leading_eigenvalues: Vec<Complex<f64>>,
    pub classification: Classification,
    pub convention: Convention,
    pub fd_epsilon: Option<f64>,
    /// Set when the iterative eigensolver did not converge.
    pub diagnostic: Option<String>,
}

impl SpectrumReport {
    pub fn is_unstable(&self) -> bool {
        self.classification == Classification::Unstable
    }

    /// True if some leading eigenvalue is one of a complex pair on the unstable side.
    pub fn has_unstable_complex_pair(&self) -> bool {
        self.leading_eigenvalues
            .iter()
            .any(|z| z.im.abs() > MARGIN && unstable(*z, self.convention))
    }
}

/// `√ε · (1 + ‖u‖∞)`.
pub fn default_fd_epsilon(state: &StateVector) -> f64 {
    f64::EPSILON.sqrt() * (1.0 + state.max_abs())
}

/// Central-difference Jacobian of the flattened residual.
pub fn jacobian_fd<P: Problem + ?Sized>(
    problem: &P,
    state: &StateVector,
    eps: Option<f64>,
) -> Result<DMatrix<f64>> {
    central_difference(state, eps, |u| problem.residual(u).values().to_vec())
}

/// Central-difference Jacobian of one solver step.
pub fn step_jacobian_fd<P: Problem + ?Sized>(
    problem: &P,
    state: &StateVector,
    eps: Option<f64>,
) -> Result<DMatrix<f64>> {
    central_difference(state, eps, |u| problem.step(u).into_inner())
}

fn central_difference(
    state: &StateVector,
    eps: Option<f64>,
    f: impl Fn(&StateVector) -> Vec<f64>,
) -> Result<DMatrix<f64>> {
    if !state.is_finite() {
        return Err(OdroError::Config(
            "jacobian requested at a non-finite state".into(),
        ));
    }
    let eps = eps.unwrap_or_else(|| default_fd_epsilon(state));
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(OdroError::Config(format!(
            "finite-difference step must be positive, got {eps}"
        )));
    }
    let n = state.n_dof();
    let mut probe = state.clone();
    let mut jac: Option<DMatrix<f64>> = None;
    for j in 0..n {
        let u = state[j];
        probe[j] = u + eps;
        let plus = f(&probe);
        probe[j] = u - eps;
        let minus = f(&probe);
        probe[j] = u;
        if plus.iter().chain(&minus).any(|v| !v.is_finite()) {
            return Err(OdroError::NonFiniteJacobian { column: j });
        }
        let jac = jac.get_or_insert_with(|| DMatrix::zeros(plus.len(), n));
        for (i, (p, m)) in plus.iter().zip(&minus).enumerate() {
            jac[(i, j)] = (p - m) / (2.0 * eps);
        }
    }
    Ok(jac.unwrap_or_else(|| DMatrix::zeros(0, 0)))
}

/// All eigenvalues of a square matrix, dense.
pub fn eigenvalues(matrix: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    ensure_square(matrix)?;
    if matrix.is_empty() {
        return Ok(Vec::new());
    }
    Ok(matrix.complex_eigenvalues().iter().copied().collect())
}

/// `ρ(A) = max |λ|`; `+∞` if the eigensolve produced non-finite values.
pub fn spectral_radius(matrix: &DMatrix<f64>) -> f64 {
    match eigenvalues(matrix) {
        Ok(ev) => {
            ev.iter().map(|z| z.norm()).fold(
                0.0,
                |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) },
            )
        }
        Err(_) => f64::NAN,
    }
}

/// The `k` leading eigenvalues of `matrix` under `convention`, with a
/// stability classification.
///
/// Matrices up to [`DENSE_LIMIT`] are solved densely. Larger residual
/// Jacobians use subspace iteration on `(J − σI)⁻¹` with `σ` right of the
/// Gershgorin disks, which targets the eigenvalues nearest `σ`; larger step
/// maps use subspace iteration on `J` itself.
pub fn leading_spectrum(
    matrix: &DMatrix<f64>,
    k: usize,
    convention: Convention,
) -> Result<SpectrumReport> {
    ensure_square(matrix)?;
    if k == 0 {
        return Err(OdroError::Config(
            "need at least one leading eigenvalue".into(),
        ));
    }
    let n = matrix.nrows();
    let (mut values, diagnostic) = if n <= DENSE_LIMIT {
        (eigenvalues(matrix)?, None)
    } else {
        match convention {
            Convention::ResidualJacobian => shift_invert_subspace(matrix, k),
            Convention::StepMap => {
                let (mu, diag) = subspace_iteration(n, (k + 8).min(n), |x| matrix * x);
                (mu, diag)
            }
        }
    };
    sort_leading(&mut values, convention);
    values.truncate(k);
    let classification = if diagnostic.is_some() {
        Classification::Marginal
    } else {
        classify(&values, convention)
    };
    Ok(SpectrumReport {
        leading_eigenvalues: values,
        classification,
        convention,
        fd_epsilon: None,
        diagnostic,
    })
}

/// Residual-Jacobian spectrum of `problem` at `state`.
pub fn analyze<P: Problem + ?Sized>(
    problem: &P,
    state: &StateVector,
    k: usize,
) -> Result<SpectrumReport> {
    let eps = default_fd_epsilon(state);
    let jac = jacobian_fd(problem, state, Some(eps))?;
    let mut report = leading_spectrum(&jac, k, Convention::ResidualJacobian)?;
    report.fd_epsilon = Some(eps);
    Ok(report)
}

/// Step-map spectrum of `problem` at `state`.
pub fn analyze_step_map<P: Problem + ?Sized>(
    problem: &P,
    state: &StateVector,
    k: usize,
) -> Result<SpectrumReport> {
    let eps = default_fd_epsilon(state);
    let jac = step_jacobian_fd(problem, state, Some(eps))?;
    let mut report = leading_spectrum(&jac, k, Convention::StepMap)?;
    report.fd_epsilon = Some(eps);
    Ok(report)
}

pub fn classify(values: &[Complex<f64>], convention: Convention) -> Classification {
    if values.iter().any(|z| unstable(*z, convention)) {
        return Classification::Unstable;
    }
    let stable = values.iter().all(|z| match convention {
        Convention::ResidualJacobian => z.re < -MARGIN,
        Convention::StepMap => z.norm() < 1.0 - MARGIN,
    });
    if stable && !values.is_empty() {
        Classification::Stable
    } else {
        Classification::Marginal
    }
}

fn unstable(z: Complex<f64>, convention: Convention) -> bool {
    match convention {
        Convention::ResidualJacobian => z.re > MARGIN,
        Convention::StepMap => z.norm() > 1.0 + MARGIN,
    }
}

fn sort_leading(values: &mut [Complex<f64>], convention: Convention) {
    values.sort_by(|a, b| {
        let key = |z: &Complex<f64>| match convention {
            Convention::ResidualJacobian => z.re,
            Convention::StepMap => z.norm(),
        };
        key(b).total_cmp(&key(a)).then(b.im.total_cmp(&a.im))
    });
}

fn ensure_square(matrix: &DMatrix<f64>) -> Result<()> {
    if matrix.nrows() == matrix.ncols() {
        Ok(())
    } else {
        Err(OdroError::NotSquare {
            rows: matrix.nrows(),
            cols: matrix.ncols(),
        })
    }
}

/// Eigenvalues of `J` nearest the right edge of its Gershgorin region.
fn shift_invert_subspace(matrix: &DMatrix<f64>, k: usize) -> (Vec<Complex<f64>>, Option<String>) {
    let n = matrix.nrows();
    let edge = (0..n)
        .map(|i| {
            let off: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| matrix[(i, j)].abs())
                .sum();
            matrix[(i, i)] + off
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let sigma = edge + 1.0 + 1e-3 * edge.abs();
    let shifted = matrix - DMatrix::identity(n, n) * sigma;
    let lu = shifted.lu();
    let p = (k + 8).min(n);
    let (mu, diag) = subspace_iteration(n, p, |x| {
        lu.solve(x)
            .unwrap_or_else(|| DMatrix::from_element(n, x.ncols(), f64::NAN))
    });
    let lambda = mu
        .into_iter()
        .map(|m| Complex::new(sigma, 0.0) + m.inv())
        .collect();
    (lambda, diag)
}

/// Block power iteration with Rayleigh-Ritz extraction; returns the Ritz
/// values of the dominant `p`-dimensional invariant subspace of `op`.
fn subspace_iteration(
    n: usize,
    p: usize,
    op: impl Fn(&DMatrix<f64>) -> DMatrix<f64>,
) -> (Vec<Complex<f64>>, Option<String>) {
    // deterministic, well-mixed start block
    let mut q = DMatrix::from_fn(n, p, |i, j| {
        ((i * 7 + j * 13 + 1) as f64 * 0.618_033_988_749_895).fract() - 0.5
    });
    q = q.qr().q();
    let mut prev: Vec<Complex<f64>> = Vec::new();
    for sweep in 0..SUBSPACE_SWEEPS {
        let z = op(&q);
        if z.iter().any(|v| !v.is_finite()) {
            return (
                prev,
                Some(format!(
                    "subspace iteration hit a non-finite value in sweep {sweep}"
                )),
            );
        }
        let h = q.transpose() * &z;
        let mut ritz: Vec<Complex<f64>> = h.complex_eigenvalues().iter().copied().collect();
        ritz.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.im.total_cmp(&a.im)));
        let scale = ritz
            .first()
            .map_or(1.0, |z| z.norm())
            .max(f64::MIN_POSITIVE);
        let settled = prev.len() == ritz.len()
            && ritz
                .iter()
                .zip(&prev)
                .take(p.saturating_sub(8).max(1))
                .all(|(a, b)| (a - b).norm() <= SUBSPACE_TOL * scale);
        q = z.qr().q();
        if settled {
            return (ritz, None);
        }
        prev = ritz;
    }
    (
        prev,
        Some(format!(
            "subspace iteration did not settle within {SUBSPACE_SWEEPS} sweeps"
        )),
    )
}
