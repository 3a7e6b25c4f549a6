//! Sliding-window SMDK with equal-interval checkpoints.
//!
//! The window itself is stored. Every L-th arrival opens a checkpoint with a
//! fresh [`KnapStream`] instance over the stream suffix starting there;
//! expired checkpoints are dropped. A query takes the oldest live instance,
//! which has seen everything from its checkpoint onward, and feeds it the
//! stored window prefix it has not seen. The instance is cloned first so
//! queries stay side-effect free and repeated slides never double-process
//! the overlap.

use std::collections::VecDeque;

use crate::element::{Element, KnapsackSpec, SolutionSet};
use crate::error::{Error, Result};
use crate::knapstream::KnapStream;
use crate::oracle::BoxedOracle;

pub struct KnapWindow {
    window: usize,
    interval: u64,
    lambda: f64,
    spec: KnapsackSpec,
    prototype: BoxedOracle,
    active: VecDeque<Element>,
    checkpoints: VecDeque<KnapStream>,
    last_ordinal: Option<u64>,
}

/// Default checkpoint interval for window size W and slide size T:
/// ceil(sqrt(W * T)).
pub fn default_interval(window: usize, slide: usize) -> u64 {
    ((window as f64 * slide as f64).sqrt().ceil() as u64).max(1)
}

impl KnapWindow {
    pub fn new(
        window: usize,
        interval: u64,
        lambda: f64,
        spec: KnapsackSpec,
        oracle: BoxedOracle,
    ) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidConfig("window size must be >= 1".into()));
        }
        if interval == 0 || interval > window as u64 {
            return Err(Error::InvalidConfig(format!(
                "checkpoint interval must be in [1, W], got {interval} for W = {window}"
            )));
        }
        // Fail fast on bad lambda; instances are created lazily later.
        KnapStream::new(1, lambda, spec, oracle.boxed_clone())?;
        Ok(Self {
            window,
            interval,
            lambda,
            spec,
            prototype: oracle,
            active: VecDeque::new(),
            checkpoints: VecDeque::new(),
            last_ordinal: None,
        })
    }

    fn window_start(&self, t: u64) -> u64 {
        (t + 1).saturating_sub(self.window as u64).max(1)
    }

    /// Appends one element: opens a checkpoint when the schedule fires,
    /// drops expired state, and routes the element through every live
    /// instance. Checkpoints open at t = 1, L+1, 2L+1, ... so a query is
    /// well-defined from the very first element.
    pub fn process(&mut self, element: &Element) -> Result<()> {
        let t = element.ordinal();
        if let Some(last) = self.last_ordinal {
            if t <= last {
                return Err(Error::OutOfOrder { last, got: t });
            }
        }
        if element.costs().len() != self.spec.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.spec.dimension(),
                actual: element.costs().len(),
            });
        }

        if (t - 1).is_multiple_of(self.interval) || self.checkpoints.is_empty() {
            self.checkpoints.push_back(KnapStream::new(
                t,
                self.lambda,
                self.spec,
                self.prototype.boxed_clone(),
            )?);
        }

        let start = self.window_start(t);
        self.active.push_back(element.clone());
        while self
            .active
            .front()
            .is_some_and(|e| e.ordinal() < start)
        {
            self.active.pop_front();
        }
        while self
            .checkpoints
            .front()
            .is_some_and(|h| h.start() < start)
        {
            self.checkpoints.pop_front();
        }

        for instance in &mut self.checkpoints {
            instance.process(element)?;
        }
        self.last_ordinal = Some(t);
        Ok(())
    }

    /// Solution for the current active window. The oldest instance has not
    /// seen the window elements before its checkpoint, so they are replayed
    /// into a clone before asking it for its solution.
    pub fn query(&self) -> SolutionSet {
        let Some(front) = self.checkpoints.front() else {
            return SolutionSet::empty(self.spec.dimension());
        };
        let t = self.last_ordinal.expect("checkpoint implies an element");
        let start = self.window_start(t);
        if front.start() <= start {
            return front.solution();
        }
        let mut clone = front.clone();
        // The unseen prefix sits at the head of the stored window.
        for e in &self.active {
            if e.ordinal() >= front.start() {
                break;
            }
            if e.ordinal() >= start {
                clone.replay(e);
            }
        }
        clone.solution()
    }

    pub fn checkpoint_count(&self) -> usize {
        self.checkpoints.len()
    }

    pub fn checkpoint_positions(&self) -> Vec<u64> {
        self.checkpoints.iter().map(KnapStream::start).collect()
    }

    /// Elements held: the stored window plus candidate solutions across all
    /// live instances.
    pub fn stored_elements(&self) -> usize {
        self.active.len()
            + self
                .checkpoints
                .iter()
                .map(KnapStream::stored_elements)
                .sum::<usize>()
    }

    pub fn window_size(&self) -> usize {
        self.window
    }

    pub fn interval(&self) -> u64 {
        self.interval
    }

    pub fn current_time(&self) -> Option<u64> {
        self.last_ordinal
    }

    pub(crate) fn instances(&self) -> impl Iterator<Item = &KnapStream> {
        self.checkpoints.iter()
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

    fn window(w: usize, l: u64) -> KnapWindow {
        KnapWindow::new(
            w,
            l,
            0.1,
            KnapsackSpec::new(1).unwrap(),
            Box::new(ModularOracle::new()),
        )
        .unwrap()
    }

    #[test]
    fn checkpoint_schedule_and_expiry() {
        let mut kw = window(9, 3);
        for t in 1..=9 {
            kw.process(&modular(t, 1.0, 0.2)).unwrap();
        }
        assert_eq!(kw.checkpoint_positions(), vec![1, 4, 7]);
        // t = 10: window start moves to 2, checkpoint 1 expires, 10 opens.
        kw.process(&modular(10, 1.0, 0.2)).unwrap();
        assert_eq!(kw.checkpoint_positions(), vec![4, 7, 10]);
    }

    #[test]
    fn checkpoint_count_stays_bounded() {
        let mut kw = window(9, 3);
        for t in 1..=40 {
            kw.process(&modular(t, 1.0, 0.2)).unwrap();
            assert!(kw.checkpoint_count() <= 9usize.div_ceil(3) + 1);
            let positions = kw.checkpoint_positions();
            for pair in positions.windows(2) {
                assert_eq!(pair[1] - pair[0], 3);
            }
        }
    }

    #[test]
    fn single_checkpoint_prefix_equals_standalone_run() {
        let mut kw = window(5, 5);
        let mut ks = KnapStream::new(
            1,
            0.1,
            KnapsackSpec::new(1).unwrap(),
            Box::new(ModularOracle::new()),
        )
        .unwrap();
        for t in 1..=3u64 {
            let e = modular(t, 0.5 + t as f64, 0.3);
            kw.process(&e).unwrap();
            ks.process(&e).unwrap();
        }
        assert_eq!(kw.checkpoint_positions(), vec![1]);
        let (a, b) = (kw.query(), ks.solution());
        assert_eq!(a.ordinals(), b.ordinals());
        assert_eq!(a.utility(), b.utility());
    }

    #[test]
    fn query_is_side_effect_free() {
        let mut kw = window(4, 2);
        for t in 1..=11 {
            kw.process(&modular(t, (t % 5) as f64 + 0.5, 0.35)).unwrap();
        }
        let first = kw.query();
        let second = kw.query();
        assert_eq!(first.ordinals(), second.ordinals());
        assert_eq!(first.utility(), second.utility());
    }

    #[test]
    fn query_covers_only_the_active_window() {
        let mut kw = window(4, 2);
        for t in 1..=20 {
            kw.process(&modular(t, 1.0 + (t % 3) as f64, 0.3)).unwrap();
            let start = (t + 1).saturating_sub(4).max(1);
            let solution = kw.query();
            assert!(solution
                .ordinals()
                .iter()
                .all(|&o| o >= start && o <= t));
        }
    }

    #[test]
    fn out_of_order_is_rejected() {
        let mut kw = window(4, 2);
        kw.process(&modular(1, 1.0, 0.5)).unwrap();
        assert!(matches!(
            kw.process(&modular(1, 1.0, 0.5)),
            Err(Error::OutOfOrder { .. })
        ));
    }

    #[test]
    fn interval_must_fit_the_window() {
        assert!(KnapWindow::new(
            4,
            5,
            0.1,
            KnapsackSpec::new(1).unwrap(),
            Box::new(ModularOracle::new()),
        )
        .is_err());
    }

    #[test]
    fn default_interval_is_sqrt_of_window_times_slide() {
        assert_eq!(default_interval(9, 1), 3);
        assert_eq!(default_interval(10, 1), 4);
        assert_eq!(default_interval(10_000, 10), 317);
    }
}
