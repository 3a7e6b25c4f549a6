//! The utility-oracle contract shared by every algorithm.

use crate::element::Element;

/// Incremental state for one monotone submodular utility function.
///
/// An oracle owns the state of one growing set S and answers marginal-gain
/// queries against it. Contract:
///
/// - `utility()` of a fresh oracle is 0.
/// - `gain(v)` is the marginal utility of adding `v` to the current state
///   and never mutates it; monotonicity means it is never negative (up to
///   float noise).
/// - `insert(v)` grows the state; the same element must not be inserted
///   twice.
/// - Clones are fully independent: mutating one never affects another.
///
/// Oracles are single-writer, but clones may be moved to other threads.
pub trait UtilityOracle: Send {
    /// Cached utility f(S) of the current state.
    fn utility(&self) -> f64;

    /// Marginal gain of adding `element` to the current state.
    fn gain(&self, element: &Element) -> f64;

    /// Adds `element` to the state.
    fn insert(&mut self, element: &Element);

    /// Clears the state back to the empty set.
    fn reset(&mut self);

    fn boxed_clone(&self) -> BoxedOracle;

    /// Utility of an arbitrary set, evaluated on a fresh copy of this
    /// oracle's configuration. The receiver's state is untouched.
    fn evaluate(&self, elements: &[Element]) -> f64 {
        let mut fresh = self.boxed_clone();
        fresh.reset();
        for e in elements {
            fresh.insert(e);
        }
        fresh.utility()
    }
}

pub type BoxedOracle = Box<dyn UtilityOracle>;

impl Clone for BoxedOracle {
    fn clone(&self) -> Self {
        self.boxed_clone()
    }
}
