//! Sliding-window SMDK without storing the window.
//!
//! A checkpoint (with its own buffered [`KnapStream`]) opens for every
//! arrival (or every batch). The index keeps checkpoints sparse by deleting
//! any checkpoint whose utility is approximated, up to a factor (1 - beta),
//! by the checkpoint two positions later. At most one expired checkpoint is
//! retained: its utility is an upper bound for the window optimum, but its
//! solution is never returned. Queries greedily extend each candidate of the
//! governing instance with buffered near-miss elements before taking the
//! best result.

use std::collections::VecDeque;

use crate::element::{
    cost_effectiveness, feasible_fast, Element, KnapsackSpec, SolutionSet,
};
use crate::error::{Error, Result};
use crate::knapstream::{BufferParams, Candidate, KnapStream};
use crate::oracle::BoxedOracle;

pub struct KnapWindowPlus {
    window: usize,
    lambda: f64,
    beta: f64,
    buffer_params: BufferParams,
    spec: KnapsackSpec,
    prototype: BoxedOracle,
    checkpoints: VecDeque<KnapStream>,
    last_ordinal: Option<u64>,
}

impl KnapWindowPlus {
    pub fn new(
        window: usize,
        lambda: f64,
        beta: f64,
        buffer_params: BufferParams,
        spec: KnapsackSpec,
        oracle: BoxedOracle,
    ) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidConfig("window size must be >= 1".into()));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "beta must be in (0, 1), got {beta}"
            )));
        }
        // Fail fast on bad lambda / buffer parameters.
        KnapStream::with_buffers(1, lambda, spec, oracle.boxed_clone(), buffer_params)?;
        Ok(Self {
            window,
            lambda,
            beta,
            buffer_params,
            spec,
            prototype: oracle,
            checkpoints: VecDeque::new(),
            last_ordinal: None,
        })
    }

    fn window_start(&self, t: u64) -> u64 {
        (t + 1).saturating_sub(self.window as u64).max(1)
    }

    pub fn process(&mut self, element: &Element) -> Result<()> {
        self.process_batch(std::slice::from_ref(element))
    }

    /// Processes one window slide worth of elements: opens one checkpoint at
    /// the batch start, routes the batch through every live instance (with
    /// buffer maintenance), drops all but the newest expired checkpoint, and
    /// prunes the index to its fixpoint.
    pub fn process_batch(&mut self, batch: &[Element]) -> Result<()> {
        let Some(first) = batch.first() else {
            return Ok(());
        };
        if batch.len() > self.window {
            return Err(Error::InvalidConfig(format!(
                "batch of {} exceeds window size {}",
                batch.len(),
                self.window
            )));
        }
        let mut prev = self.last_ordinal;
        for e in batch {
            if let Some(p) = prev {
                if e.ordinal() <= p {
                    return Err(Error::OutOfOrder {
                        last: p,
                        got: e.ordinal(),
                    });
                }
            }
            prev = Some(e.ordinal());
        }

        self.checkpoints.push_back(KnapStream::with_buffers(
            first.ordinal(),
            self.lambda,
            self.spec,
            self.prototype.boxed_clone(),
            self.buffer_params,
        )?);

        for element in batch {
            for instance in &mut self.checkpoints {
                instance.process(element)?;
            }
        }
        let t = batch.last().expect("batch is nonempty").ordinal();
        self.last_ordinal = Some(t);

        // Keep at most one expired checkpoint: drop the head while its
        // successor is already out of the window too.
        let start = self.window_start(t);
        while self.checkpoints.len() >= 2 && self.checkpoints[1].start() < start {
            self.checkpoints.pop_front();
        }

        self.prune();
        Ok(())
    }

    /// Deletes checkpoints until no utility rule fires, scanning left to
    /// right and restarting after every deletion so the result is
    /// deterministic.
    fn prune(&mut self) {
        loop {
            let utilities: Vec<f64> = self
                .checkpoints
                .iter()
                .map(KnapStream::best_utility)
                .collect();
            match find_prunable(&utilities, self.beta) {
                Some(kill) => {
                    self.checkpoints.remove(kill);
                }
                None => break,
            }
        }
        #[cfg(debug_assertions)]
        {
            let u: Vec<f64> = self
                .checkpoints
                .iter()
                .map(KnapStream::best_utility)
                .collect();
            for i in 0..u.len().saturating_sub(2) {
                debug_assert!(
                    u[i + 2] < (1.0 - self.beta) * u[i],
                    "prune fixpoint violated at {i}: {u:?}"
                );
            }
        }
    }

    /// Solution for the current active window.
    ///
    /// While the first checkpoint is live it governs; once it expires the
    /// second checkpoint governs, seeded with the expired instance's
    /// still-active solution and buffer elements (matched candidate by
    /// candidate via the estimate exponent). Either way, every candidate is
    /// extended by cost-effectiveness greedy over its buffer pool, the best
    /// singleton is extended over the union pool, and the raw instance
    /// solution competes in the final argmax so post-processing can only
    /// improve the result. Live instances are never touched.
    pub fn query(&self) -> SolutionSet {
        let Some(front) = self.checkpoints.front() else {
            return SolutionSet::empty(self.spec.dimension());
        };
        let t = self.last_ordinal.expect("checkpoint implies an element");
        let start = self.window_start(t);

        let (governing, donor) = if front.start() >= start {
            (front, None)
        } else {
            let second = self
                .checkpoints
                .get(1)
                .expect("an expired head always has a live successor");
            debug_assert!(second.start() >= start);
            (second, Some(front))
        };

        let mut best = governing.solution();
        let mut union_pool: Vec<Element> = Vec::new();
        let mut union_seen: std::collections::HashSet<u64> = std::collections::HashSet::new();

        let mut post_processed: Vec<SolutionSet> = Vec::new();
        for candidate in governing.candidates() {
            let mut pool: Vec<Element> = Vec::new();
            if let Some(buffer) = candidate.buffer() {
                pool.extend(buffer.elements().cloned());
            }
            if let Some(donor) = donor {
                if let Some(matched) = donor.candidate_by_exponent(candidate.exponent()) {
                    seed_pool(&mut pool, matched, candidate, start);
                }
            }
            for e in &pool {
                if union_seen.insert(e.ordinal()) {
                    union_pool.push(e.clone());
                }
            }
            if pool.is_empty() {
                continue;
            }
            let mut solution = candidate.solution().clone();
            let mut oracle = candidate.oracle().boxed_clone();
            cost_effect_greedy(&mut solution, &mut oracle, pool, &self.spec);
            post_processed.push(solution);
        }

        // The best singleton joins post-processing like any other seed.
        if let Some((element, utility)) = governing.v_max() {
            let mut solution = SolutionSet::singleton(element.clone(), *utility);
            let mut oracle = governing.prototype().boxed_clone();
            oracle.reset();
            oracle.insert(element);
            let pool: Vec<Element> = union_pool
                .into_iter()
                .filter(|e| e.ordinal() != element.ordinal())
                .collect();
            cost_effect_greedy(&mut solution, &mut oracle, pool, &self.spec);
            post_processed.push(solution);
        }

        for solution in post_processed {
            if solution.better_than(&best) {
                best = solution;
            }
        }
        best
    }

    pub fn checkpoint_count(&self) -> usize {
        self.checkpoints.len()
    }

    pub fn checkpoint_positions(&self) -> Vec<u64> {
        self.checkpoints.iter().map(KnapStream::start).collect()
    }

    pub fn checkpoint_utilities(&self) -> Vec<f64> {
        self.checkpoints
            .iter()
            .map(KnapStream::best_utility)
            .collect()
    }

    /// Elements held across all instances (candidate solutions plus
    /// buffers). The window itself is not stored.
    pub fn stored_elements(&self) -> usize {
        self.checkpoints
            .iter()
            .map(KnapStream::stored_elements)
            .sum()
    }

    pub fn current_time(&self) -> Option<u64> {
        self.last_ordinal
    }

    pub fn window_size(&self) -> usize {
        self.window
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub(crate) fn instances(&self) -> impl Iterator<Item = &KnapStream> {
        self.checkpoints.iter()
    }
}

/// First deletable checkpoint index under the (1 - beta) rule, scanning from
/// the oldest: if utilities[i + 2] >= (1 - beta) * utilities[i], the middle
/// checkpoint i + 1 is approximated by its successor and can go.
fn find_prunable(utilities: &[f64], beta: f64) -> Option<usize> {
    for i in 0..utilities.len().saturating_sub(2) {
        if utilities[i + 2] >= (1.0 - beta) * utilities[i] {
            return Some(i + 1);
        }
    }
    None
}

/// Query-time seeding: still-active elements from the expired instance's
/// matched candidate (its solution and its buffer) that could still join the
/// governing candidate.
fn seed_pool(pool: &mut Vec<Element>, donor: &Candidate, into: &Candidate, window_start: u64) {
    let solution = into.solution();
    let mut push = |e: &Element| {
        if e.ordinal() < window_start {
            return;
        }
        if solution.contains_ordinal(e.ordinal()) {
            return;
        }
        if !feasible_fast(solution.cost_totals(), e.costs()) {
            return;
        }
        if pool.iter().any(|p| p.ordinal() == e.ordinal()) {
            return;
        }
        pool.push(e.clone());
    };
    for e in donor.solution().members() {
        push(e);
    }
    if let Some(buffer) = donor.buffer() {
        for e in buffer.elements() {
            push(e);
        }
    }
}

/// Greedily moves pool elements into the solution by marginal gain per unit
/// of worst-case cost, recomputed each round, until nothing feasible is
/// left. Ties break toward the smaller ordinal.
pub fn cost_effect_greedy(
    solution: &mut SolutionSet,
    oracle: &mut BoxedOracle,
    mut pool: Vec<Element>,
    spec: &KnapsackSpec,
) {
    debug_assert_eq!(solution.cost_totals().len(), spec.dimension());
    pool.retain(|e| !solution.contains_ordinal(e.ordinal()));
    loop {
        pool.retain(|e| feasible_fast(solution.cost_totals(), e.costs()));
        let Some((index, _)) = pool
            .iter()
            .enumerate()
            .map(|(i, e)| (i, cost_effectiveness(e, oracle.gain(e))))
            .max_by(|(i, a), (j, b)| {
                a.total_cmp(b)
                    .then_with(|| pool[*j].ordinal().cmp(&pool[*i].ordinal()))
            })
        else {
            break;
        };
        let element = pool.swap_remove(index);
        oracle.insert(&element);
        solution.push(element, oracle.utility());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::Payload;
    use crate::utility::ModularOracle;

    fn modular(ordinal: u64, value: f64, cost: f64) -> Element {
        Element::new(ordinal, Payload::Value(value), vec![cost]).unwrap()
    }

    fn kwp(window: usize, beta: f64) -> KnapWindowPlus {
        KnapWindowPlus::new(
            window,
            0.1,
            beta,
            BufferParams::default(),
            KnapsackSpec::new(1).unwrap(),
            Box::new(ModularOracle::new()),
        )
        .unwrap()
    }

    #[test]
    fn prune_rule_examples() {
        assert_eq!(find_prunable(&[10.0, 9.5, 9.2], 0.1), Some(1));
        assert_eq!(find_prunable(&[10.0, 9.5, 8.9], 0.1), None);
        assert_eq!(find_prunable(&[10.0, 9.5], 0.1), None);
    }

    #[test]
    fn checkpoint_count_obeys_theta_bound_on_decreasing_utilities() {
        // Values shrink geometrically, so checkpoint utilities spread out
        // and the index keeps more of them, but never beyond the bound.
        let mut state = kwp(64, 0.1);
        let mut value = 1.0;
        for t in 1..=64u64 {
            state.process(&modular(t, value, 0.9)).unwrap();
            value *= 0.82;
            let utilities = state.checkpoint_utilities();
            let (first, last) = (utilities[0], *utilities.last().unwrap());
            if last > 0.0 {
                let theta = first / last;
                let bound =
                    (2.0 * theta.ln() / (1.0f64 / 0.9).ln()).ceil() as usize + 2;
                assert!(
                    state.checkpoint_count() <= bound,
                    "s = {} exceeds bound {bound}",
                    state.checkpoint_count()
                );
            }
        }
    }

    #[test]
    fn at_most_one_expired_checkpoint() {
        let mut state = kwp(6, 0.1);
        for t in 1..=40u64 {
            state
                .process(&modular(t, 1.0 + (t % 4) as f64, 0.4))
                .unwrap();
            let start = (t + 1).saturating_sub(6).max(1);
            let expired = state
                .checkpoint_positions()
                .iter()
                .filter(|&&x| x < start)
                .count();
            assert!(expired <= 1, "t={t}: {expired} expired checkpoints");
        }
    }

    #[test]
    fn query_with_empty_buffers_matches_raw_solution() {
        let mut state = kwp(10, 0.1);
        // A single element is accepted by every candidate, so no buffer
        // entry exists anywhere and post-processing is a no-op.
        state.process(&modular(1, 2.0, 0.4)).unwrap();
        let raw = state.checkpoints[0].solution();
        let processed = state.query();
        assert_eq!(processed.ordinals(), raw.ordinals());
        assert_eq!(processed.utility(), raw.utility());
    }

    #[test]
    fn query_never_loses_to_raw_solution() {
        let mut state = kwp(12, 0.1);
        for t in 1..=60u64 {
            state
                .process(&modular(t, 0.2 + ((t * 7) % 10) as f64 / 4.0, 0.15 + ((t * 3) % 5) as f64 / 10.0))
                .unwrap();
            let governing = if state.checkpoint_positions()[0] >= (t + 1).saturating_sub(12).max(1)
            {
                &state.checkpoints[0]
            } else {
                &state.checkpoints[1]
            };
            let raw = governing.solution().utility();
            assert!(state.query().utility() >= raw - 1e-12);
        }
    }

    #[test]
    fn query_stays_inside_the_window() {
        let mut state = kwp(8, 0.15);
        for t in 1..=50u64 {
            state
                .process(&modular(t, 1.0 + ((t * 5) % 7) as f64 / 2.0, 0.25))
                .unwrap();
            let start = (t + 1).saturating_sub(8).max(1);
            for o in state.query().ordinals() {
                assert!(o >= start && o <= t, "t={t}: ordinal {o} outside window");
            }
        }
    }

    #[test]
    fn greedy_on_empty_pool_is_identity() {
        let spec = KnapsackSpec::new(1).unwrap();
        let mut solution = SolutionSet::empty(1);
        let mut oracle: BoxedOracle = Box::new(ModularOracle::new());
        cost_effect_greedy(&mut solution, &mut oracle, Vec::new(), &spec);
        assert!(solution.is_empty());
    }

    #[test]
    fn greedy_follows_cost_effectiveness_order() {
        // Spare budget 0.5; (cost 0.3, gain 0.6) has CE 2.0 and goes first,
        // after which (cost 0.4, gain 0.4) no longer fits.
        let spec = KnapsackSpec::new(1).unwrap();
        let mut solution = SolutionSet::empty(1);
        let mut oracle: BoxedOracle = Box::new(ModularOracle::new());
        let filler = modular(1, 0.0, 0.5);
        oracle.insert(&filler);
        solution.push(filler, 0.0);
        cost_effect_greedy(
            &mut solution,
            &mut oracle,
            vec![modular(2, 0.6, 0.3), modular(3, 0.4, 0.4)],
            &spec,
        );
        assert_eq!(solution.ordinals(), vec![1, 2]);
        assert_eq!(solution.utility(), 0.6);
    }

    #[test]
    fn greedy_on_the_modular_toy_reaches_the_optimum() {
        let spec = KnapsackSpec::new(1).unwrap();
        let mut solution = SolutionSet::empty(1);
        let mut oracle: BoxedOracle = Box::new(ModularOracle::new());
        let pool = vec![
            modular(1, 3.0, 0.6),
            modular(2, 1.0, 0.3),
            modular(3, 2.0, 0.5),
            modular(4, 4.0, 0.5),
        ];
        cost_effect_greedy(&mut solution, &mut oracle, pool, &spec);
        assert_eq!(solution.ordinals(), vec![4, 3]);
        assert_eq!(solution.utility(), 6.0);
    }

    #[test]
    fn greedy_skips_infeasible_pool() {
        let spec = KnapsackSpec::new(1).unwrap();
        let mut solution = SolutionSet::empty(1);
        let mut oracle: BoxedOracle = Box::new(ModularOracle::new());
        let filler = modular(1, 1.0, 0.9);
        oracle.insert(&filler);
        solution.push(filler, 1.0);
        cost_effect_greedy(&mut solution, &mut oracle, vec![modular(2, 5.0, 0.5)], &spec);
        assert_eq!(solution.ordinals(), vec![1]);
    }
}
