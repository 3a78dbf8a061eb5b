//! Proper orthogonal decomposition of a snapshot ensemble.
//!
//! The basis is built with the method of snapshots: for `N` snapshots of
//! dimension `n_dof` the `N×N` Gram matrix of the mean-centered snapshots is
//! eigen-decomposed, and each mode is recovered as `Φᵢ = X′vᵢ/σᵢ`. Since `N`
//! is a handful of states this avoids any decomposition of size `n_dof`.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{OdroError, Result};
use crate::types::StateVector;

/// The most recent `capacity` sampled states, oldest first.
#[derive(Debug, Clone)]
pub struct SnapshotBuffer {
    capacity: usize,
    columns: VecDeque<StateVector>,
    tags: VecDeque<u64>,
}

impl SnapshotBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            columns: VecDeque::with_capacity(capacity),
            tags: VecDeque::with_capacity(capacity),
        }
    }

    /// Builds a buffer holding exactly `states`, tagged `0, 1, 2, ...`.
    pub fn from_states(states: impl IntoIterator<Item = StateVector>) -> Result<Self> {
        let states: Vec<_> = states.into_iter().collect();
        let mut buffer = Self::new(states.len().max(1));
        for (i, s) in states.into_iter().enumerate() {
            buffer.push(s, i as u64)?;
        }
        Ok(buffer)
    }

    /// Appends a snapshot, evicting the oldest one when full.
    pub fn push(&mut self, state: StateVector, iteration: u64) -> Result<()> {
        if let Some(first) = self.columns.front() {
            if first.n_dof() != state.n_dof() {
                return Err(OdroError::DimensionMismatch {
                    expected: first.n_dof(),
                    actual: state.n_dof(),
                });
            }
        }
        if let Some(&last) = self.tags.back() {
            if iteration <= last {
                return Err(OdroError::Config(format!(
                    "snapshot tags must increase: {iteration} after {last}"
                )));
            }
        }
        if self.columns.len() == self.capacity {
            self.columns.pop_front();
            self.tags.pop_front();
        }
        self.columns.push_back(state);
        self.tags.push_back(iteration);
        Ok(())
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.columns.len() == self.capacity
    }

    pub fn clear(&mut self) {
        self.columns.clear();
        self.tags.clear();
    }

    pub fn last(&self) -> Option<&StateVector> {
        self.columns.back()
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = &StateVector> {
        self.columns.iter()
    }

    pub fn iteration_tags(&self) -> impl ExactSizeIterator<Item = u64> + '_ {
        self.tags.iter().copied()
    }

    pub fn n_dof(&self) -> Option<usize> {
        self.columns.front().map(StateVector::n_dof)
    }
}

/// Mean, orthonormal modes and singular values of a centered snapshot set.
#[derive(Debug, Clone)]
pub struct PodBasis {
    mean: StateVector,
    modes: DMatrix<f64>,
    singular_values: Vec<f64>,
    n_snapshots: usize,
}

/// Modes and singular values before the mean is attached.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub modes: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub n_snapshots: usize,
}

impl Decomposition {
    pub fn with_mean(self, mean: StateVector) -> Result<PodBasis> {
        if mean.n_dof() != self.modes.nrows() {
            return Err(OdroError::DimensionMismatch {
                expected: self.modes.nrows(),
                actual: mean.n_dof(),
            });
        }
        Ok(PodBasis {
            mean,
            modes: self.modes,
            singular_values: self.singular_values,
            n_snapshots: self.n_snapshots,
        })
    }
}

impl PodBasis {
    /// Centers the buffer and decomposes it.
    pub fn from_snapshots(buffer: &SnapshotBuffer, n_modes: usize, rank_tol: f64) -> Result<Self> {
        let (mean, centered) = center(buffer)?;
        decompose(&centered, n_modes, rank_tol)?.with_mean(mean)
    }

    pub fn mean(&self) -> &StateVector {
        &self.mean
    }

    /// `n_dof × r`, column-orthonormal.
    pub fn modes(&self) -> &DMatrix<f64> {
        &self.modes
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn n_dof(&self) -> usize {
        self.modes.nrows()
    }

    pub fn n_snapshots(&self) -> usize {
        self.n_snapshots
    }

    /// RMS amplitude of each mode's coefficient across the snapshots, `σᵢ/√N`.
    pub fn coefficient_scales(&self) -> Vec<f64> {
        let root_n = (self.n_snapshots as f64).sqrt();
        self.singular_values.iter().map(|s| s / root_n).collect()
    }

    /// `max |ΦᵀΦ − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.modes.transpose() * &self.modes;
        let r = gram.nrows();
        let mut worst = 0.0_f64;
        for i in 0..r {
            for j in 0..r {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }
}

/// Column mean of the snapshots and the mean-subtracted snapshot matrix.
pub fn center(snapshots: &SnapshotBuffer) -> Result<(StateVector, DMatrix<f64>)> {
    let n = snapshots.len();
    if n < 2 {
        return Err(OdroError::Config(format!(
            "POD needs at least 2 snapshots, got {n}"
        )));
    }
    let n_dof = snapshots.n_dof().unwrap_or(0);
    let mut mean = vec![0.0; n_dof];
    for s in snapshots.states() {
        for (m, v) in mean.iter_mut().zip(s.iter()) {
            *m += v;
        }
    }
    let inv = 1.0 / n as f64;
    mean.iter_mut().for_each(|m| *m *= inv);

    let mut centered = DMatrix::zeros(n_dof, n);
    for (j, s) in snapshots.states().enumerate() {
        for i in 0..n_dof {
            centered[(i, j)] = s[i] - mean[i];
        }
    }
    Ok((StateVector::new(mean), centered))
}

/// Method-of-snapshots POD of a centered snapshot matrix.
///
/// Keeps eigenpairs of the Gram matrix whose singular value exceeds
/// `rank_tol` times the largest, then truncates to
/// `r = min(n_modes, numerical rank, N − 1, n_dof)`.
pub fn decompose(centered: &DMatrix<f64>, n_modes: usize, rank_tol: f64) -> Result<Decomposition> {
    let (n_dof, n) = centered.shape();
    if n < 2 {
        return Err(OdroError::Config(format!(
            "POD needs at least 2 snapshots, got {n}"
        )));
    }
    if n_modes < 1 {
        return Err(OdroError::Config(
            "at least one POD mode must be requested".into(),
        ));
    }
    let gram = centered.transpose() * centered;
    let eig = symmetric_eigen(&gram);

    let lead = eig.values.first().copied().unwrap_or(0.0);
    if !(lead > 0.0) || !lead.is_finite() {
        return Err(OdroError::NoUsableModes);
    }
    let sigma_lead = lead.sqrt();
    let numerical_rank = eig
        .values
        .iter()
        .take_while(|&&l| l > 0.0 && l.sqrt() > rank_tol * sigma_lead)
        .count();
    let r = n_modes.min(numerical_rank).min(n - 1).min(n_dof);
    if r == 0 {
        return Err(OdroError::NoUsableModes);
    }

    let mut modes = DMatrix::zeros(n_dof, r);
    let mut singular_values = Vec::with_capacity(r);
    for i in 0..r {
        let sigma = eig.values[i].sqrt();
        let v = eig.vectors.column(i);
        let phi = centered * v / sigma;
        modes.set_column(i, &phi);
        singular_values.push(sigma);
    }
    reorthonormalize(&mut modes);
    fix_signs(&mut modes);

    Ok(Decomposition {
        modes,
        singular_values,
        n_snapshots: n,
    })
}

/// `Φ·ξ + X̄`.
pub fn reconstruct(basis: &PodBasis, xi: &[f64]) -> Result<StateVector> {
    if xi.len() != basis.rank() {
        return Err(OdroError::DimensionMismatch {
            expected: basis.rank(),
            actual: xi.len(),
        });
    }
    let mut u = basis.mean.clone();
    for (j, &c) in xi.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for (ui, phi) in u.iter_mut().zip(basis.modes.column(j).iter()) {
            *ui += c * phi;
        }
    }
    Ok(u)
}

/// `Φᵀ(u − X̄)`.
pub fn project(basis: &PodBasis, u: &StateVector) -> Result<Vec<f64>> {
    if u.n_dof() != basis.n_dof() {
        return Err(OdroError::DimensionMismatch {
            expected: basis.n_dof(),
            actual: u.n_dof(),
        });
    }
    let diff = DVector::from_iterator(
        u.n_dof(),
        u.iter().zip(basis.mean.iter()).map(|(a, m)| a - m),
    );
    Ok((basis.modes.transpose() * diff).iter().copied().collect())
}

/// Eigenpairs of a symmetric matrix, values sorted non-increasing; eigenvector
/// `i` is column `i` of `vectors`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi eigensolver for small symmetric matrices.
///
/// Sweeps until the off-diagonal Frobenius norm drops below `1e-14` times the
/// matrix norm.
pub fn symmetric_eigen(matrix: &DMatrix<f64>) -> SymmetricEigen {
    let n = matrix.nrows();
    let mut a = matrix.clone();
    let mut v = DMatrix::identity(n, n);
    let scale = a.norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    SymmetricEigen { values, vectors }
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Applies `A ← JᵀAJ`, `V ← VJ` for the rotation zeroing `A[p][q]`.
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Modified Gram-Schmidt, in place.
fn reorthonormalize(modes: &mut DMatrix<f64>) {
    for j in 0..modes.ncols() {
        for i in 0..j {
            let proj = modes.column(i).dot(&modes.column(j));
            let qi = modes.column(i).clone_owned();
            modes.column_mut(j).axpy(-proj, &qi, 1.0);
        }
        let norm = modes.column(j).norm();
        if norm > 0.0 {
            modes.column_mut(j).scale_mut(1.0 / norm);
        }
    }
}

/// Makes the largest-magnitude entry of every column positive.
fn fix_signs(modes: &mut DMatrix<f64>) {
    for mut col in modes.column_iter_mut() {
        let pivot = col
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(0.0);
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
}
