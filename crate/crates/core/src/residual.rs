//! The scalar objective minimized in the POD subspace.

use crate::optimizer::{CostFunction, EvalTracker};
use crate::pod::{reconstruct, PodBasis};
use crate::problem::Problem;
use crate::types::{ResidualField, StateVector};

/// Root mean square over cells of the per-cell residual norms,
/// `√(Σₘ ‖Rₘ‖₂² / n_cells)`.
///
/// Any non-finite component, or overflow while summing, yields `+∞`.
pub fn r_total(field: &ResidualField) -> f64 {
    let mut sum = 0.0;
    for &v in field.values() {
        if !v.is_finite() {
            return f64::INFINITY;
        }
        sum += v * v;
    }
    let value = (sum / field.n_cells() as f64).sqrt();
    if value.is_finite() {
        value
    } else {
        f64::INFINITY
    }
}

/// `r_total` of a state; non-finite states map straight to `+∞`.
pub fn state_r_total<P: Problem + ?Sized>(problem: &P, state: &StateVector) -> f64 {
    if !state.is_finite() {
        return f64::INFINITY;
    }
    r_total(&problem.residual(state))
}

/// `ξ ↦ r_total(residual(Φξ + X̄))` with evaluation counting.
pub struct Objective<'a, P: Problem + ?Sized> {
    problem: &'a P,
    basis: &'a PodBasis,
    tracker: EvalTracker,
}

impl<'a, P: Problem + ?Sized> Objective<'a, P> {
    pub fn new(problem: &'a P, basis: &'a PodBasis) -> Self {
        Self {
            problem,
            basis,
            tracker: EvalTracker::default(),
        }
    }

    pub fn basis(&self) -> &PodBasis {
        self.basis
    }

    /// Evaluates without touching the counters.
    fn value(&self, xi: &[f64]) -> f64 {
        match reconstruct(self.basis, xi) {
            Ok(u) => state_r_total(self.problem, &u),
            Err(_) => f64::INFINITY,
        }
    }
}

impl<P: Problem + ?Sized> CostFunction for Objective<'_, P> {
    fn evaluate(&mut self, xi: &[f64]) -> f64 {
        let f = self.value(xi);
        self.tracker.record(xi, f);
        f
    }

    fn eval_count(&self) -> usize {
        self.tracker.count()
    }

    fn best_seen(&self) -> Option<(&[f64], f64)> {
        self.tracker.best()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pod::{project, SnapshotBuffer};
    use crate::problems::LinearMapProblem;

    #[test]
    fn r_total_zero_field() {
        assert_eq!(r_total(&ResidualField::scalar(vec![0.0; 7])), 0.0);
    }

    #[test]
    fn r_total_two_scalar_cells() {
        let r = r_total(&ResidualField::scalar(vec![3.0, 4.0]));
        assert!((r - 12.5f64.sqrt()).abs() < 1e-15);
        assert!((r - 3.5355339).abs() < 1e-7);
    }

    #[test]
    fn r_total_single_vector_cell() {
        let f = ResidualField::new(vec![1.0, 2.0, 2.0], 1, 3).unwrap();
        assert_eq!(r_total(&f), 3.0);
    }

    #[test]
    fn r_total_non_finite_is_infinite() {
        assert_eq!(
            r_total(&ResidualField::scalar(vec![1.0, f64::NAN])),
            f64::INFINITY
        );
        assert_eq!(
            r_total(&ResidualField::scalar(vec![1e300, 1e300])),
            f64::INFINITY
        );
    }

    fn linear_setup() -> (LinearMapProblem, PodBasis, Vec<StateVector>) {
        let p = LinearMapProblem::paper_default();
        let mut states = vec![];
        let mut u = StateVector::new(vec![0.3, -0.4]);
        for _ in 0..4 {
            u = p.step(&u);
            states.push(u.clone());
        }
        let buf = SnapshotBuffer::from_states(states.clone()).unwrap();
        let basis = PodBasis::from_snapshots(&buf, 2, 1e-12).unwrap();
        (p, basis, states)
    }

    #[test]
    fn evaluate_at_projection_of_last_snapshot() {
        let (p, basis, states) = linear_setup();
        let last = states.last().unwrap();
        let xi = project(&basis, last).unwrap();
        let mut obj = Objective::new(&p, &basis);
        let f = obj.evaluate(&xi);
        let expected = state_r_total(&p, &reconstruct(&basis, &xi).unwrap());
        assert_eq!(f, expected);
        assert_eq!(obj.eval_count(), 1);
    }

    #[test]
    fn evaluate_at_oracle_steady_state_is_zero() {
        let (p, basis, _) = linear_setup();
        // the basis spans R^2, so x* = (1, 1) is representable
        assert_eq!(basis.rank(), 2);
        let xstar = p.oracle_steady_state().unwrap();
        let xi = project(&basis, &xstar).unwrap();
        let mut obj = Objective::new(&p, &basis);
        assert!(obj.evaluate(&xi) < 1e-12);
    }

    #[test]
    fn overflowing_coefficients_give_sentinel() {
        let (p, basis, _) = linear_setup();
        let mut obj = Objective::new(&p, &basis);
        assert_eq!(obj.evaluate(&[1e300, 1e300]), f64::INFINITY);
        assert_eq!(obj.eval_count(), 1);
    }

    #[test]
    fn best_seen_tracks_minimum() {
        let (p, basis, _) = linear_setup();
        let mut obj = Objective::new(&p, &basis);
        let a = obj.evaluate(&[0.1, 0.0]);
        let b = obj.evaluate(&[1e300, 0.0]);
        let c = obj.evaluate(&[0.0, 0.0]);
        let (xi, f) = obj.best_seen().unwrap();
        assert_eq!(f, a.min(b).min(c));
        assert_eq!(obj.eval_count(), 3);
        assert!(xi == [0.1, 0.0] || xi == [0.0, 0.0]);
    }

    #[test]
    fn evaluation_does_not_advance_problem() {
        let (p, basis, _) = linear_setup();
        let before = p.initial_state();
        let mut obj = Objective::new(&p, &basis);
        obj.evaluate(&[0.2, 0.1]);
        assert_eq!(p.initial_state(), before);
    }
}
