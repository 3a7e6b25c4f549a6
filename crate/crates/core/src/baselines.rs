//! Batch baselines: cost-effectiveness greedy over a stored window, the
//! exact brute-force optimum for small windows, and the approximation-ratio
//! calculator used to check both streaming algorithms against theory.

use crate::element::{feasible_fast, Element, KnapsackSpec, SolutionSet};
use crate::error::{Error, Result};
use crate::knapwindowplus::cost_effect_greedy;
use crate::oracle::BoxedOracle;

/// Hard cap for brute-force enumeration (2^n subsets).
pub const BRUTE_FORCE_CAP: usize = 25;

/// Approximation guarantees as functions of the run parameters.
///
/// epsilon = min(delta + lambda, 0.5 + lambda) where delta is the largest
/// observed cost; the single-pass bound is (1 - epsilon) / (1 + d) and the
/// pruned-index bound is (1 - epsilon - beta) / (2 (1 + d)).
#[derive(Debug, Clone, Copy)]
pub struct ApproxBound {
    pub lambda: f64,
    pub beta: f64,
    pub d: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub ks_bound: f64,
    pub kwp_bound: f64,
}

impl ApproxBound {
    pub fn new(lambda: f64, beta: f64, d: usize, delta: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) || !(0.0..1.0).contains(&beta) {
            return Err(Error::InvalidConfig(
                "lambda must be in (0,1) and beta in [0,1)".into(),
            ));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "delta (max cost) must be in (0, 1], got {delta}"
            )));
        }
        let epsilon = (delta + lambda).min(0.5 + lambda);
        if epsilon >= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "epsilon = {epsilon} leaves no guarantee; pick a smaller lambda"
            )));
        }
        let epsilon_prime = epsilon + beta;
        let ks_bound = (1.0 - epsilon) / (1.0 + d as f64);
        let kwp_bound = (1.0 - epsilon_prime) / (2.0 * (1.0 + d as f64));
        Ok(Self {
            lambda,
            beta,
            d,
            delta,
            epsilon,
            epsilon_prime,
            ks_bound,
            kwp_bound,
        })
    }
}

/// CostEffectGreedy over a whole stored window, from scratch: repeatedly
/// picks the feasible element with the highest marginal gain per unit of
/// worst-case cost. The d-knapsack adaptation divides by max_j c_j(v), so
/// results are comparable across knapsack dimensions.
pub fn ceg(window: &[Element], spec: &KnapsackSpec, oracle: &BoxedOracle) -> SolutionSet {
    let mut solution = SolutionSet::empty(spec.dimension());
    let mut state = oracle.boxed_clone();
    state.reset();
    cost_effect_greedy(&mut solution, &mut state, window.to_vec(), spec);
    solution
}

/// Exact optimum over all feasible subsets of the window. Enumeration is
/// depth-first and prunes extensions that are already cost-infeasible; the
/// tie-break matches the streaming algorithms so results are comparable
/// member for member.
pub fn brute_force_opt(
    window: &[Element],
    spec: &KnapsackSpec,
    oracle: &BoxedOracle,
) -> Result<SolutionSet> {
    if window.len() > BRUTE_FORCE_CAP {
        return Err(Error::WindowTooLarge {
            len: window.len(),
            cap: BRUTE_FORCE_CAP,
        });
    }
    let mut best = SolutionSet::empty(spec.dimension());
    let mut empty_oracle = oracle.boxed_clone();
    empty_oracle.reset();
    let empty = SolutionSet::empty(spec.dimension());
    explore(window, 0, &empty, &empty_oracle, &mut best);
    Ok(best)
}

fn explore(
    elements: &[Element],
    from: usize,
    solution: &SolutionSet,
    oracle: &BoxedOracle,
    best: &mut SolutionSet,
) {
    for i in from..elements.len() {
        let e = &elements[i];
        if !feasible_fast(solution.cost_totals(), e.costs()) {
            continue;
        }
        let mut grown_oracle = oracle.boxed_clone();
        grown_oracle.insert(e);
        let mut grown = solution.clone();
        grown.push(e.clone(), grown_oracle.utility());
        if grown.better_than(best) {
            *best = grown.clone();
        }
        explore(elements, i + 1, &grown, &grown_oracle, best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::Payload;
    use crate::utility::ModularOracle;

    fn modular(ordinal: u64, value: f64, costs: Vec<f64>) -> Element {
        Element::new(ordinal, Payload::Value(value), costs).unwrap()
    }

    fn toy() -> Vec<Element> {
        vec![
            modular(1, 3.0, vec![0.6]),
            modular(2, 1.0, vec![0.3]),
            modular(3, 2.0, vec![0.5]),
            modular(4, 4.0, vec![0.5]),
        ]
    }

    fn modular_oracle() -> BoxedOracle {
        Box::new(ModularOracle::new())
    }

    #[test]
    fn ceg_solves_the_toy() {
        let spec = KnapsackSpec::new(1).unwrap();
        let s = ceg(&toy(), &spec, &modular_oracle());
        assert_eq!(s.ordinals(), vec![4, 3]);
        assert_eq!(s.utility(), 6.0);
    }

    #[test]
    fn ceg_single_element_window() {
        let spec = KnapsackSpec::new(1).unwrap();
        let s = ceg(&[modular(7, 1.5, vec![0.4])], &spec, &modular_oracle());
        assert_eq!(s.ordinals(), vec![7]);
    }

    #[test]
    fn ceg_with_unit_costs_picks_exactly_one() {
        let spec = KnapsackSpec::new(1).unwrap();
        let window = vec![
            modular(1, 2.0, vec![1.0]),
            modular(2, 5.0, vec![1.0]),
            modular(3, 3.0, vec![1.0]),
        ];
        let s = ceg(&window, &spec, &modular_oracle());
        assert_eq!(s.ordinals(), vec![2]);
    }

    #[test]
    fn brute_force_finds_the_optimum() {
        let spec = KnapsackSpec::new(1).unwrap();
        let s = brute_force_opt(&toy(), &spec, &modular_oracle()).unwrap();
        assert_eq!(s.utility(), 6.0);
        assert_eq!(s.ordinals(), vec![3, 4]);
    }

    #[test]
    fn brute_force_empty_window() {
        let spec = KnapsackSpec::new(1).unwrap();
        let s = brute_force_opt(&[], &spec, &modular_oracle()).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.utility(), 0.0);
    }

    #[test]
    fn second_knapsack_can_force_a_singleton() {
        let spec = KnapsackSpec::new(2).unwrap();
        let window = vec![
            modular(1, 1.0, vec![0.2, 0.9]),
            modular(2, 3.0, vec![0.2, 0.9]),
            modular(3, 2.0, vec![0.2, 0.9]),
        ];
        let s = brute_force_opt(&window, &spec, &modular_oracle()).unwrap();
        assert_eq!(s.ordinals(), vec![2]);
    }

    #[test]
    fn brute_force_enforces_the_cap() {
        let spec = KnapsackSpec::new(1).unwrap();
        let window: Vec<Element> = (1..=26)
            .map(|i| modular(i, 1.0, vec![0.5]))
            .collect();
        assert!(matches!(
            brute_force_opt(&window, &spec, &modular_oracle()),
            Err(Error::WindowTooLarge { len: 26, cap: 25 })
        ));
    }

    #[test]
    fn brute_dominates_greedy() {
        let spec = KnapsackSpec::new(1).unwrap();
        // Greedy takes the high-CE items (1 then 3) and locks out the pair
        // {1, 2} worth 5.0.
        let window = vec![
            modular(1, 1.0, vec![0.1]),
            modular(2, 4.0, vec![0.55]),
            modular(3, 3.8, vec![0.5]),
        ];
        let g = ceg(&window, &spec, &modular_oracle());
        let b = brute_force_opt(&window, &spec, &modular_oracle()).unwrap();
        assert_eq!(g.utility(), 4.8);
        assert_eq!(b.utility(), 5.0);
        assert!(b.utility() >= g.utility());
    }

    #[test]
    fn bound_arithmetic() {
        let b = ApproxBound::new(0.1, 0.1, 1, 0.6).unwrap();
        assert!((b.epsilon - 0.6).abs() < 1e-15);
        assert!((b.epsilon_prime - 0.7).abs() < 1e-15);
        assert!((b.ks_bound - 0.2).abs() < 1e-15);
        assert!((b.kwp_bound - 0.075).abs() < 1e-15);
        assert!(b.ks_bound > 0.0 && b.ks_bound < 1.0);
        assert!(b.kwp_bound < b.ks_bound);
        // delta below 0.5 uses the delta branch.
        let b = ApproxBound::new(0.1, 0.0, 2, 0.3).unwrap();
        assert!((b.epsilon - 0.4).abs() < 1e-15);
        assert!((b.ks_bound - 0.2).abs() < 1e-15);
        // A lambda so large that the guarantee vanishes is rejected.
        assert!(ApproxBound::new(0.6, 0.1, 1, 0.6).is_err());
    }
}
