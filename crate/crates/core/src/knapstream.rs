//! Single-pass SMDK over an append-only stream.
//!
//! The optimal utility is unknown, so the instance tracks lower/upper bounds
//! for it from the observed elements and keeps one candidate solution per
//! estimate on the geometric grid (1+lambda)^l between the bounds. A
//! candidate accepts an element when the marginal gain clears a threshold
//! derived from its estimate and the d-knapsack constraint stays satisfied.

use std::collections::BTreeMap;

use crate::element::{
    cost_effectiveness, feasible_fast, Element, KnapsackSpec, SolutionSet,
};
use crate::error::{Error, Result};
use crate::oracle::BoxedOracle;

/// Buffer tuning for near-miss elements, used by the sliding-window index.
#[derive(Debug, Clone, Copy)]
pub struct BufferParams {
    /// Fraction of the acceptance threshold an element must reach to be
    /// buffered, in (0, 1).
    pub alpha: f64,
    /// Maximum buffered elements per candidate.
    pub eta: usize,
}

impl Default for BufferParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            eta: 20,
        }
    }
}

#[derive(Debug, Clone)]
struct BufferEntry {
    element: Element,
    admission_ce: f64,
}

/// Bounded pool of elements that nearly cleared a candidate's threshold,
/// kept ordered by cost-effectiveness at admission time. The admission-time
/// key avoids re-evaluating gains on every eviction; query-time greedy
/// recomputes exact gains, so the ordering is only a heuristic.
#[derive(Debug, Clone)]
pub struct CandidateBuffer {
    entries: Vec<BufferEntry>,
    params: BufferParams,
}

impl CandidateBuffer {
    fn new(params: BufferParams) -> Self {
        Self {
            entries: Vec::new(),
            params,
        }
    }

    /// Admission plus overflow maintenance. `threshold` is the candidate's
    /// full acceptance threshold for this element; `gain` its marginal gain.
    fn add(&mut self, element: &Element, gain: f64, threshold: f64, solution: &SolutionSet) {
        if solution.contains_ordinal(element.ordinal()) {
            return;
        }
        if gain < self.params.alpha * threshold {
            return;
        }
        let ce = cost_effectiveness(element, gain);
        let ordinal = element.ordinal();
        let pos = self
            .entries
            .partition_point(|e| match e.admission_ce.total_cmp(&ce) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => e.element.ordinal() < ordinal,
            });
        self.entries.insert(
            pos,
            BufferEntry {
                element: element.clone(),
                admission_ce: ce,
            },
        );
        if self.entries.len() > self.params.eta {
            // Infeasible entries go first, then the least cost-effective.
            self.entries
                .retain(|e| feasible_fast(solution.cost_totals(), e.element.costs()));
            while self.entries.len() > self.params.eta {
                self.entries.remove(0);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.entries.iter().map(|e| &e.element)
    }
}

/// One thresholded partial solution S_phi together with its estimate.
#[derive(Clone)]
pub struct Candidate {
    exponent: i32,
    phi: f64,
    solution: SolutionSet,
    oracle: BoxedOracle,
    buffer: Option<CandidateBuffer>,
}

impl Candidate {
    fn new(
        exponent: i32,
        lambda: f64,
        d: usize,
        prototype: &BoxedOracle,
        buffer: Option<BufferParams>,
    ) -> Self {
        Self {
            exponent,
            phi: grid_value(lambda, exponent),
            solution: SolutionSet::empty(d),
            oracle: prototype.boxed_clone(),
            buffer: buffer.map(CandidateBuffer::new),
        }
    }

    /// Threshold rule for one element: accept iff the marginal gain reaches
    /// delta_t * phi / (1+d) and the solution stays feasible. Rejected
    /// elements may still enter the near-miss buffer.
    fn process(&mut self, element: &Element, delta_t: f64, d: usize) -> bool {
        let gain = self.oracle.gain(element);
        let threshold = delta_t * self.phi / (1.0 + d as f64);
        if gain >= threshold && feasible_fast(self.solution.cost_totals(), element.costs()) {
            self.oracle.insert(element);
            self.solution.push(element.clone(), self.oracle.utility());
            return true;
        }
        if let Some(buffer) = &mut self.buffer {
            buffer.add(element, gain, threshold, &self.solution);
        }
        false
    }

    pub fn exponent(&self) -> i32 {
        self.exponent
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn solution(&self) -> &SolutionSet {
        &self.solution
    }

    pub fn buffer(&self) -> Option<&CandidateBuffer> {
        self.buffer.as_ref()
    }

    pub(crate) fn oracle(&self) -> &BoxedOracle {
        &self.oracle
    }
}

/// Read-only view of one candidate, for inspection and demos.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CandidateSummary {
    pub exponent: i32,
    pub phi: f64,
    pub utility: f64,
    pub size: usize,
    pub buffered: usize,
}

fn grid_value(lambda: f64, exponent: i32) -> f64 {
    (1.0 + lambda).powi(exponent)
}

/// Integer exponents l with lower <= (1+lambda)^l <= upper, or None when the
/// interval is empty. Log-derived endpoints are nudged so membership agrees
/// exactly with `grid_value`.
fn exponent_range(lambda: f64, lower: f64, upper: f64) -> Result<Option<(i32, i32)>> {
    if upper <= 0.0 {
        return Ok(None);
    }
    if lower > upper {
        return Err(Error::CorruptBounds { lower, upper });
    }
    let base = (1.0 + lambda).ln();
    let mut lo = (lower.ln() / base).ceil() as i32;
    while grid_value(lambda, lo) < lower {
        lo += 1;
    }
    while grid_value(lambda, lo - 1) >= lower {
        lo -= 1;
    }
    let mut hi = (upper.ln() / base).floor() as i32;
    while grid_value(lambda, hi) > upper {
        hi -= 1;
    }
    while grid_value(lambda, hi + 1) <= upper {
        hi += 1;
    }
    Ok(if lo > hi { None } else { Some((lo, hi)) })
}

/// One append-only stream run.
#[derive(Clone)]
pub struct KnapStream {
    start: u64,
    lambda: f64,
    spec: KnapsackSpec,
    prototype: BoxedOracle,
    buffer_params: Option<BufferParams>,
    candidates: BTreeMap<i32, Candidate>,
    /// Lower bound m for the optimal utility.
    lower: f64,
    /// Upper bound M: maximum observed cost-effectiveness of a singleton.
    upper: f64,
    v_max: Option<(Element, f64)>,
    /// Best solution ever observed. Grid refreshes can delete the currently
    /// best candidate, so the snapshot is what keeps the reported utility
    /// nondecreasing over the instance's lifetime.
    best: SolutionSet,
    gamma_seen: f64,
    last_ordinal: Option<u64>,
    processed: u64,
}

impl KnapStream {
    pub fn new(start: u64, lambda: f64, spec: KnapsackSpec, oracle: BoxedOracle) -> Result<Self> {
        Self::build(start, lambda, spec, oracle, None)
    }

    /// As [`KnapStream::new`], with per-candidate near-miss buffers enabled.
    pub fn with_buffers(
        start: u64,
        lambda: f64,
        spec: KnapsackSpec,
        oracle: BoxedOracle,
        params: BufferParams,
    ) -> Result<Self> {
        Self::build(start, lambda, spec, oracle, Some(params))
    }

    fn build(
        start: u64,
        lambda: f64,
        spec: KnapsackSpec,
        oracle: BoxedOracle,
        buffer_params: Option<BufferParams>,
    ) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be in (0, 1), got {lambda}"
            )));
        }
        if let Some(p) = &buffer_params {
            if !(p.alpha > 0.0 && p.alpha < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "alpha must be in (0, 1), got {}",
                    p.alpha
                )));
            }
            if p.eta == 0 {
                return Err(Error::InvalidConfig("eta must be >= 1".into()));
            }
        }
        if start == 0 {
            return Err(Error::ZeroOrdinal);
        }
        let d = spec.dimension();
        Ok(Self {
            start,
            lambda,
            spec,
            prototype: oracle,
            buffer_params,
            candidates: BTreeMap::new(),
            lower: 0.0,
            upper: 0.0,
            v_max: None,
            best: SolutionSet::empty(d),
            gamma_seen: f64::INFINITY,
            last_ordinal: None,
            processed: 0,
        })
    }

    /// Feeds the next stream element through the bound tracker, the estimate
    /// grid, and every candidate.
    pub fn process(&mut self, element: &Element) -> Result<()> {
        if element.ordinal() < self.start {
            return Err(Error::OutOfOrder {
                last: self.start,
                got: element.ordinal(),
            });
        }
        if let Some(last) = self.last_ordinal {
            if element.ordinal() <= last {
                return Err(Error::OutOfOrder {
                    last,
                    got: element.ordinal(),
                });
            }
        }
        self.ingest(element)
    }

    /// Same pipeline as [`KnapStream::process`] minus the arrival-order
    /// checks. The window frameworks use this to feed already-validated
    /// stored elements (which predate this instance's checkpoint) into
    /// query-time clones; the solution guarantee is order-independent.
    pub(crate) fn replay(&mut self, element: &Element) {
        self.ingest(element)
            .expect("replayed elements were validated when first processed");
    }

    fn ingest(&mut self, element: &Element) -> Result<()> {
        if element.costs().len() != self.spec.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.spec.dimension(),
                actual: element.costs().len(),
            });
        }

        // Self-utility, evaluated once against the pristine empty oracle and
        // reused for the singleton tracker, the bounds, and the grid.
        let self_utility = self.prototype.gain(element);
        let gamma_t = element.min_cost();
        let delta_t = element.max_cost();
        self.gamma_seen = self.gamma_seen.min(gamma_t);

        match &self.v_max {
            Some((_, best)) if self_utility <= *best => {}
            _ => self.v_max = Some((element.clone(), self_utility)),
        }
        self.update_bounds(self_utility, gamma_t);
        self.refresh_grid()?;

        for candidate in self.candidates.values_mut() {
            candidate.process(element, delta_t, self.spec.dimension());
        }
        self.refresh_best();
        self.last_ordinal = Some(element.ordinal());
        self.processed += 1;

        #[cfg(debug_assertions)]
        for candidate in self.candidates.values() {
            debug_assert!(
                candidate
                    .solution
                    .cost_totals()
                    .iter()
                    .all(|t| *t <= self.spec.budget() + crate::element::FEASIBILITY_SLACK),
                "candidate solution left the feasible region"
            );
        }
        Ok(())
    }

    /// m and M update: M is the best observed singleton cost-effectiveness,
    /// m the self-utility of the element that achieved it.
    fn update_bounds(&mut self, self_utility: f64, gamma_t: f64) {
        let ce = self_utility / gamma_t;
        if ce > self.upper {
            self.upper = ce;
            self.lower = self_utility;
        }
    }

    /// Aligns the candidate set with the current estimate range
    /// [m, M*(1+d)]: out-of-range candidates are dropped (folding their
    /// solutions into the best-so-far snapshot), missing estimates start
    /// empty with a fresh oracle.
    fn refresh_grid(&mut self) -> Result<()> {
        let upper = self.upper * (1.0 + self.spec.dimension() as f64);
        let range = exponent_range(self.lambda, self.lower, upper)?;
        let (lo, hi) = match range {
            Some(bounds) => bounds,
            None => {
                debug_assert!(self.candidates.is_empty());
                self.candidates.clear();
                return Ok(());
            }
        };
        let stale: Vec<i32> = self
            .candidates
            .keys()
            .copied()
            .filter(|l| *l < lo || *l > hi)
            .collect();
        for l in stale {
            if let Some(gone) = self.candidates.remove(&l) {
                if gone.solution.better_than(&self.best) {
                    self.best = gone.solution;
                }
            }
        }
        for l in lo..=hi {
            self.candidates.entry(l).or_insert_with(|| {
                Candidate::new(
                    l,
                    self.lambda,
                    self.spec.dimension(),
                    &self.prototype,
                    self.buffer_params,
                )
            });
        }
        Ok(())
    }

    fn refresh_best(&mut self) {
        for candidate in self.candidates.values() {
            if candidate.solution.better_than(&self.best) {
                self.best = candidate.solution.clone();
            }
        }
        if let Some((element, utility)) = &self.v_max {
            let singleton = SolutionSet::singleton(element.clone(), *utility);
            if singleton.better_than(&self.best) {
                self.best = singleton;
            }
        }
    }

    /// Best solution over the live candidates, the best singleton, and the
    /// best-so-far snapshot. Deterministic under the solution ordering.
    pub fn solution(&self) -> SolutionSet {
        let mut best = &self.best;
        for candidate in self.candidates.values() {
            if candidate.solution.better_than(best) {
                best = &candidate.solution;
            }
        }
        let singleton = self
            .v_max
            .as_ref()
            .map(|(element, utility)| SolutionSet::singleton(element.clone(), *utility));
        if let Some(s) = &singleton {
            if s.better_than(best) {
                return s.clone();
            }
        }
        best.clone()
    }

    /// Utility of the best solution ever observed; nondecreasing in t.
    pub fn best_utility(&self) -> f64 {
        self.best.utility()
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn spec(&self) -> KnapsackSpec {
        self.spec
    }

    pub fn processed(&self) -> u64 {
        self.processed
    }

    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    /// Smallest per-element minimum cost observed so far.
    pub fn gamma_seen(&self) -> f64 {
        self.gamma_seen
    }

    /// Elements currently held in candidate solutions and buffers.
    pub fn stored_elements(&self) -> usize {
        self.candidates
            .values()
            .map(|c| c.solution.len() + c.buffer.as_ref().map_or(0, CandidateBuffer::len))
            .sum()
    }

    pub fn candidates(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.values()
    }

    pub(crate) fn candidate_by_exponent(&self, exponent: i32) -> Option<&Candidate> {
        self.candidates.get(&exponent)
    }

    pub(crate) fn v_max(&self) -> Option<&(Element, f64)> {
        self.v_max.as_ref()
    }

    pub(crate) fn prototype(&self) -> &BoxedOracle {
        &self.prototype
    }

    pub fn candidate_summaries(&self) -> Vec<CandidateSummary> {
        self.candidates
            .values()
            .map(|c| CandidateSummary {
                exponent: c.exponent,
                phi: c.phi,
                utility: c.solution.utility(),
                size: c.solution.len(),
                buffered: c.buffer.as_ref().map_or(0, CandidateBuffer::len),
            })
            .collect()
    }

    /// Current (m, M) estimate bounds.
    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }
}
