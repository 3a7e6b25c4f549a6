//! Stream elements, cost vectors, the d-knapsack constraint, and solution sets.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack absorbed when summing costs against a unit budget.
/// Budgets are O(1) and costs are bounded away from zero, so the slack is
/// negligible against any real cost.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

/// What an element carries; interpreted by the utility oracle of the run.
///
/// Shared pieces sit behind an `Arc` so cloning an element into many
/// candidate solutions stays cheap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Payload {
    /// Self-utility of the element under a modular (additive) function.
    Value(f64),
    /// Word id -> frequency bag for the coverage utility.
    Tokens(Arc<Vec<(u32, u32)>>),
    /// Feature vector for the kernel log-determinant utility.
    Features(Arc<Vec<f64>>),
    /// Item ids covered by this element, for budgeted maximum coverage.
    Items(Arc<Vec<u32>>),
}

/// One stream item: arrival position, payload, and its cost in each knapsack.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Element {
    ordinal: u64,
    payload: Payload,
    costs: Vec<f64>,
}

impl Element {
    /// Validates and builds an element. Ordinals start at 1; every cost must
    /// lie in (0, 1]. Out-of-range costs are a hard error, not clamped: the
    /// lower/upper cost bounds of the stream underpin the approximation
    /// guarantees, so silently repaired input would invalidate them.
    pub fn new(ordinal: u64, payload: Payload, costs: Vec<f64>) -> Result<Self> {
        if ordinal == 0 {
            return Err(Error::ZeroOrdinal);
        }
        if costs.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: 0,
            });
        }
        for (j, &c) in costs.iter().enumerate() {
            if !(c > 0.0 && c <= 1.0) || !c.is_finite() {
                return Err(Error::CostOutOfRange {
                    value: c,
                    knapsack: j,
                });
            }
        }
        Ok(Self {
            ordinal,
            payload,
            costs,
        })
    }

    pub fn ordinal(&self) -> u64 {
        self.ordinal
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// Minimum cost of this element across the d knapsacks.
    pub fn min_cost(&self) -> f64 {
        self.costs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Maximum cost of this element across the d knapsacks.
    pub fn max_cost(&self) -> f64 {
        self.costs.iter().copied().fold(0.0, f64::max)
    }
}

/// The d-knapsack constraint: d cost dimensions, every budget normalized
/// to 1. A set is feasible iff its cost total in each knapsack is <= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnapsackSpec {
    d: usize,
}

impl KnapsackSpec {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidConfig("knapsack dimension must be >= 1".into()));
        }
        Ok(Self { d })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// All budgets are fixed at 1 after normalization.
    pub fn budget(&self) -> f64 {
        1.0
    }
}

/// True iff adding `element` on top of `totals` keeps every knapsack within
/// its unit budget (up to [`FEASIBILITY_SLACK`]).
pub fn check_feasibility(totals: &[f64], element: &Element, spec: &KnapsackSpec) -> Result<bool> {
    if totals.len() != spec.dimension() {
        return Err(Error::DimensionMismatch {
            expected: spec.dimension(),
            actual: totals.len(),
        });
    }
    if element.costs().len() != spec.dimension() {
        return Err(Error::DimensionMismatch {
            expected: spec.dimension(),
            actual: element.costs().len(),
        });
    }
    Ok(totals
        .iter()
        .zip(element.costs())
        .all(|(t, c)| t + c <= spec.budget() + FEASIBILITY_SLACK))
}

/// Marginal gain per unit of the element's worst-case cost,
/// `gain / max_j c_j(v)`. Element costs are strictly positive by
/// construction, so the ratio is always defined.
pub fn cost_effectiveness(element: &Element, oracle_gain: f64) -> f64 {
    oracle_gain / element.max_cost()
}

/// Feasibility check for hot paths where dimensions were validated upstream.
pub(crate) fn feasible_fast(totals: &[f64], costs: &[f64]) -> bool {
    totals
        .iter()
        .zip(costs)
        .all(|(t, c)| t + c <= 1.0 + FEASIBILITY_SLACK)
}

/// A feasible solution: members in insertion order, running per-knapsack
/// cost totals, and the cached utility of the set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionSet {
    members: Vec<Element>,
    cost_totals: Vec<f64>,
    utility: f64,
}

impl SolutionSet {
    pub fn empty(d: usize) -> Self {
        Self {
            members: Vec::new(),
            cost_totals: vec![0.0; d],
            utility: 0.0,
        }
    }

    /// Builds a singleton solution with a known utility.
    pub fn singleton(element: Element, utility: f64) -> Self {
        let cost_totals = element.costs().to_vec();
        Self {
            members: vec![element],
            cost_totals,
            utility,
        }
    }

    /// Appends a member and records the utility of the grown set. The caller
    /// is responsible for having checked feasibility.
    pub fn push(&mut self, element: Element, new_utility: f64) {
        for (t, c) in self.cost_totals.iter_mut().zip(element.costs()) {
            *t += c;
        }
        self.members.push(element);
        self.utility = new_utility;
    }

    pub fn members(&self) -> &[Element] {
        &self.members
    }

    pub fn ordinals(&self) -> Vec<u64> {
        self.members.iter().map(Element::ordinal).collect()
    }

    pub fn contains_ordinal(&self, ordinal: u64) -> bool {
        self.members.iter().any(|m| m.ordinal() == ordinal)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn cost_totals(&self) -> &[f64] {
        &self.cost_totals
    }

    pub fn utility(&self) -> f64 {
        self.utility
    }

    /// Deterministic solution order: higher utility wins; ties break toward
    /// fewer members, then lexicographically smaller sorted ordinals.
    pub fn better_than(&self, other: &SolutionSet) -> bool {
        match self.utility.total_cmp(&other.utility) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => {
                if self.len() != other.len() {
                    return self.len() < other.len();
                }
                let mut a = self.ordinals();
                let mut b = other.ordinals();
                a.sort_unstable();
                b.sort_unstable();
                a < b
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn elem(ordinal: u64, costs: Vec<f64>) -> Element {
        Element::new(ordinal, Payload::Value(1.0), costs).unwrap()
    }

    #[test]
    fn feasibility_within_budget() {
        let spec = KnapsackSpec::new(1).unwrap();
        let e = elem(1, vec![0.5]);
        assert!(check_feasibility(&[0.4], &e, &spec).unwrap());
    }

    #[test]
    fn feasibility_second_knapsack_overflows() {
        let spec = KnapsackSpec::new(2).unwrap();
        let e = elem(1, vec![0.5, 0.2]);
        assert!(!check_feasibility(&[0.4, 0.9], &e, &spec).unwrap());
    }

    #[test]
    fn feasibility_full_knapsack_rejects_any_positive_cost() {
        let spec = KnapsackSpec::new(1).unwrap();
        let e = elem(1, vec![0.0001]);
        assert!(!check_feasibility(&[1.0], &e, &spec).unwrap());
    }

    #[test]
    fn feasibility_dimension_mismatch_is_error() {
        let spec = KnapsackSpec::new(2).unwrap();
        let e = elem(1, vec![0.5]);
        assert!(matches!(
            check_feasibility(&[0.0, 0.0], &e, &spec),
            Err(Error::DimensionMismatch { .. })
        ));
        let e2 = elem(1, vec![0.5, 0.5]);
        assert!(matches!(
            check_feasibility(&[0.0], &e2, &spec),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cost_effectiveness_examples() {
        let e = elem(1, vec![0.3]);
        assert_eq!(cost_effectiveness(&e, 0.6), 2.0);
        let e = elem(2, vec![0.3, 0.6]);
        assert_eq!(cost_effectiveness(&e, 0.6), 1.0);
        assert_eq!(cost_effectiveness(&e, 0.0), 0.0);
    }

    #[test]
    fn element_rejects_out_of_range_costs() {
        assert!(Element::new(1, Payload::Value(1.0), vec![0.0]).is_err());
        assert!(Element::new(1, Payload::Value(1.0), vec![1.2]).is_err());
        assert!(Element::new(1, Payload::Value(1.0), vec![-0.1]).is_err());
        assert!(Element::new(1, Payload::Value(1.0), vec![0.5, f64::NAN]).is_err());
        assert!(Element::new(0, Payload::Value(1.0), vec![0.5]).is_err());
        assert!(Element::new(1, Payload::Value(1.0), vec![1.0]).is_ok());
    }

    #[test]
    fn solution_ordering_is_deterministic() {
        let mut a = SolutionSet::empty(1);
        a.push(elem(1, vec![0.2]), 1.0);
        let mut b = SolutionSet::empty(1);
        b.push(elem(2, vec![0.2]), 1.0);
        // Same utility and size: smaller ordinal set wins.
        assert!(a.better_than(&b));
        assert!(!b.better_than(&a));
        let mut c = SolutionSet::empty(1);
        c.push(elem(3, vec![0.2]), 2.0);
        assert!(c.better_than(&a));
    }

    proptest! {
        // Incremental feasibility agrees with recomputing every knapsack
        // total from the member list.
        #[test]
        fn feasibility_matches_brute_recomputation(
            d in 1usize..=3,
            costs in proptest::collection::vec(0.01f64..=1.0, 1..24),
            next in 0.01f64..=1.0,
        ) {
            let spec = KnapsackSpec::new(d).unwrap();
            let mut solution = SolutionSet::empty(d);
            for (i, c) in costs.iter().enumerate() {
                let per_dim: Vec<f64> = (0..d).map(|j| (c * (1.0 + j as f64 * 0.1)).min(1.0)).collect();
                let e = elem(i as u64 + 1, per_dim);
                if check_feasibility(solution.cost_totals(), &e, &spec).unwrap() {
                    solution.push(e, 0.0);
                }
            }
            let probe = elem(1000, (0..d).map(|j| (next * (1.0 + j as f64 * 0.05)).min(1.0)).collect());
            let fast = check_feasibility(solution.cost_totals(), &probe, &spec).unwrap();
            // Brute: re-sum all costs from scratch.
            let mut totals = vec![0.0; d];
            for m in solution.members() {
                for (t, c) in totals.iter_mut().zip(m.costs()) {
                    *t += c;
                }
            }
            let brute = totals
                .iter()
                .zip(probe.costs())
                .all(|(t, c)| t + c <= 1.0 + FEASIBILITY_SLACK);
            prop_assert_eq!(fast, brute);
        }
    }
}
