use crate::types::{ResidualField, StateVector};

/// A discretized steady-state problem paired with its baseline iterative solver.
///
/// `step` advances the solver by one iteration; `residual` evaluates the
/// steady equations at a state without advancing anything. A state `u*` is a
/// steady-state solution iff `residual(u*)` vanishes. Implementations must be
/// deterministic and free of hidden mutable state.
pub trait Problem: Send + Sync {
    fn name(&self) -> &str;

    fn n_dof(&self) -> usize;

    fn n_cells(&self) -> usize;

    fn n_eq(&self) -> usize {
        1
    }

    fn initial_state(&self) -> StateVector;

    fn step(&self, state: &StateVector) -> StateVector;

    fn residual(&self, state: &StateVector) -> ResidualField;

    /// An independently known steady state, if the problem has one.
    fn oracle_steady_state(&self) -> Option<StateVector> {
        None
    }
}

impl<P: Problem + ?Sized> Problem for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn n_dof(&self) -> usize {
        (**self).n_dof()
    }
    fn n_cells(&self) -> usize {
        (**self).n_cells()
    }
    fn n_eq(&self) -> usize {
        (**self).n_eq()
    }
    fn initial_state(&self) -> StateVector {
        (**self).initial_state()
    }
    fn step(&self, state: &StateVector) -> StateVector {
        (**self).step(state)
    }
    fn residual(&self, state: &StateVector) -> ResidualField {
        (**self).residual(state)
    }
    fn oracle_steady_state(&self) -> Option<StateVector> {
        (**self).oracle_steady_state()
    }
}

impl std::fmt::Debug for dyn Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name())
            .field("n_dof", &self.n_dof())
            .finish()
    }
}
