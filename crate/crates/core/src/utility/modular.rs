//! Modular (additive) utility: each element carries its own fixed value.

use crate::element::{Element, Payload};
use crate::oracle::{BoxedOracle, UtilityOracle};

/// f(S) = sum of the members' values. The simplest monotone submodular
/// function; used by toy instances and the synthetic benchmark streams.
#[derive(Debug, Clone, Default)]
pub struct ModularOracle {
    total: f64,
}

impl ModularOracle {
    pub fn new() -> Self {
        Self::default()
    }
}

fn value_of(element: &Element) -> f64 {
    match element.payload() {
        Payload::Value(v) => *v,
        other => panic!("modular utility expects a value payload, got {other:?}"),
    }
}

impl UtilityOracle for ModularOracle {
    fn utility(&self) -> f64 {
        self.total
    }

    fn gain(&self, element: &Element) -> f64 {
        value_of(element)
    }

    fn insert(&mut self, element: &Element) {
        self.total += value_of(element);
    }

    fn reset(&mut self) {
        self.total = 0.0;
    }

    fn boxed_clone(&self) -> BoxedOracle {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_values() {
        let mut o = ModularOracle::new();
        assert_eq!(o.utility(), 0.0);
        let e = Element::new(1, Payload::Value(2.5), vec![0.1]).unwrap();
        assert_eq!(o.gain(&e), 2.5);
        o.insert(&e);
        assert_eq!(o.utility(), 2.5);
        o.reset();
        assert_eq!(o.utility(), 0.0);
    }
}
