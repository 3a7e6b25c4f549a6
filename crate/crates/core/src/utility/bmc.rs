//! Budgeted maximum coverage: f(S) = number (or weighted sum) of distinct
//! items covered by the members of S.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::element::{Element, Payload};
use crate::oracle::{BoxedOracle, UtilityOracle};

#[derive(Debug, Clone, Default)]
pub struct BmcOracle {
    covered: HashSet<u32>,
    /// Optional per-item weights; items absent from the map count 1.
    weights: Option<Arc<HashMap<u32, f64>>>,
    total: f64,
}

impl BmcOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn weighted(weights: Arc<HashMap<u32, f64>>) -> Self {
        Self {
            covered: HashSet::new(),
            weights: Some(weights),
            total: 0.0,
        }
    }

    fn items(element: &Element) -> &[u32] {
        match element.payload() {
            Payload::Items(items) => items,
            other => panic!("BMC utility expects an item-set payload, got {other:?}"),
        }
    }

    fn weight(&self, item: u32) -> f64 {
        match &self.weights {
            Some(w) => w.get(&item).copied().unwrap_or(1.0),
            None => 1.0,
        }
    }
}

impl UtilityOracle for BmcOracle {
    fn utility(&self) -> f64 {
        self.total
    }

    fn gain(&self, element: &Element) -> f64 {
        let mut gain = 0.0;
        let mut seen = Vec::new();
        for &item in Self::items(element) {
            if !self.covered.contains(&item) && !seen.contains(&item) {
                gain += self.weight(item);
                seen.push(item);
            }
        }
        gain
    }

    fn insert(&mut self, element: &Element) {
        for &item in Self::items(element) {
            if self.covered.insert(item) {
                self.total += self.weight(item);
            }
        }
    }

    fn reset(&mut self) {
        self.covered.clear();
        self.total = 0.0;
    }

    fn boxed_clone(&self) -> BoxedOracle {
        Box::new(self.clone())
    }
}
