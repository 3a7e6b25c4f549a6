//! Weighted word coverage: f(S) = sum over words of the maximum per-element
//! frequency in S times the word's entropy weight.

use std::collections::HashMap;
use std::io::BufRead;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crate::element::{Element, Payload};
use crate::error::{Error, Result};
use crate::oracle::{BoxedOracle, UtilityOracle};

/// Precomputed word weights, w(id) = p(id) * ln(1/p(id)), plus the
/// string-to-id index used at ingestion time. Immutable and shareable.
#[derive(Debug, Default)]
pub struct WordWeightTable {
    weights: Vec<f64>,
    index: HashMap<String, u32>,
}

impl WordWeightTable {
    /// Builds a table from raw nonnegative weights; word ids are the indices.
    pub fn from_weights(weights: Vec<f64>) -> Self {
        Self {
            weights,
            index: HashMap::new(),
        }
    }

    /// Builds a table from (word, generation probability) pairs.
    pub fn from_probabilities<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, f64)>,
    {
        let mut weights = Vec::new();
        let mut index = HashMap::new();
        for (word, p) in entries {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "word probability for `{word}` is {p}, must be in (0, 1]"
                )));
            }
            let id = weights.len() as u32;
            weights.push(p * (1.0 / p).ln());
            index.insert(word, id);
        }
        Ok(Self { weights, index })
    }

    /// Parses the vocabulary format: one `word<TAB>p(word)` per line.
    pub fn from_tsv(reader: impl BufRead) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (word, p) = line.split_once('\t').ok_or_else(|| Error::Ingest {
                line: i + 1,
                msg: "expected `word<TAB>probability`".into(),
            })?;
            let p: f64 = p.trim().parse().map_err(|e| Error::Ingest {
                line: i + 1,
                msg: format!("bad probability: {e}"),
            })?;
            entries.push((word.to_string(), p));
        }
        Self::from_probabilities(entries)
    }

    pub fn id_of(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn weight(&self, id: u32) -> Option<f64> {
        self.weights.get(id as usize).copied()
    }
}

/// Incremental coverage state: per-word running maximum frequency over the
/// inserted elements, plus the running utility total.
#[derive(Debug, Clone)]
pub struct CoverageOracle {
    table: Arc<WordWeightTable>,
    curmax: HashMap<u32, u32>,
    total: f64,
    warned_unknown: Arc<AtomicBool>,
}

impl CoverageOracle {
    pub fn new(table: Arc<WordWeightTable>) -> Self {
        Self {
            table,
            curmax: HashMap::new(),
            total: 0.0,
            warned_unknown: Arc::new(AtomicBool::new(false)),
        }
    }

    fn bag_of(element: &Element) -> &[(u32, u32)] {
        match element.payload() {
            Payload::Tokens(bag) => bag,
            other => panic!("coverage utility expects a token payload, got {other:?}"),
        }
    }

    fn weight(&self, id: u32) -> f64 {
        match self.table.weight(id) {
            Some(w) => w,
            None => {
                // Unknown ids contribute nothing; warn a single time.
                if !self.warned_unknown.swap(true, Ordering::Relaxed) {
                    eprintln!("coverage: word id {id} not in the weight table, treated as weight 0");
                }
                0.0
            }
        }
    }
}

impl UtilityOracle for CoverageOracle {
    fn utility(&self) -> f64 {
        self.total
    }

    fn gain(&self, element: &Element) -> f64 {
        let mut gain = 0.0;
        for &(id, n) in Self::bag_of(element) {
            let cur = self.curmax.get(&id).copied().unwrap_or(0);
            if n > cur {
                gain += f64::from(n - cur) * self.weight(id);
            }
        }
        gain
    }

    fn insert(&mut self, element: &Element) {
        for &(id, n) in Self::bag_of(element) {
            let cur = self.curmax.get(&id).copied().unwrap_or(0);
            if n > cur {
                self.total += f64::from(n - cur) * self.weight(id);
                self.curmax.insert(id, n);
            }
        }
    }

    fn reset(&mut self) {
        self.curmax.clear();
        self.total = 0.0;
    }

    fn boxed_clone(&self) -> BoxedOracle {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tokens(ordinal: u64, bag: &[(u32, u32)]) -> Element {
        Element::new(ordinal, Payload::Tokens(Arc::new(bag.to_vec())), vec![0.1]).unwrap()
    }

    fn unit_table(n: usize) -> Arc<WordWeightTable> {
        Arc::new(WordWeightTable::from_weights(vec![1.0; n]))
    }

    #[test]
    fn gain_from_empty_is_self_utility() {
        let o = CoverageOracle::new(unit_table(4));
        let v = tokens(1, &[(0, 1), (1, 1)]);
        assert_eq!(o.gain(&v), 2.0);
    }

    #[test]
    fn already_covered_word_adds_nothing() {
        let mut o = CoverageOracle::new(unit_table(4));
        o.insert(&tokens(1, &[(0, 1)]));
        let v = tokens(2, &[(0, 1), (2, 1)]);
        assert_eq!(o.gain(&v), 1.0);
    }

    #[test]
    fn frequency_increase_counts_the_difference() {
        // curmax(a)=1, v brings a:3 at weight 0.5 -> (3-1)*0.5 = 1.0, and the
        // same answer falls out of re-evaluating the union from scratch.
        let table = Arc::new(WordWeightTable::from_weights(vec![0.5]));
        let mut o = CoverageOracle::new(table);
        let first = tokens(1, &[(0, 1)]);
        let second = tokens(2, &[(0, 3)]);
        o.insert(&first);
        let gain = o.gain(&second);
        assert_eq!(gain, 1.0);
        // Direct evaluation of the coverage formula on the union.
        let union_direct = 3.0 * 0.5;
        assert_eq!(o.utility() + gain, union_direct);
    }

    #[test]
    fn unknown_word_is_weight_zero() {
        let o = CoverageOracle::new(unit_table(1));
        let v = tokens(1, &[(0, 1), (99, 5)]);
        assert_eq!(o.gain(&v), 1.0);
    }

    #[test]
    fn tsv_roundtrip() {
        let input = "cat\t0.5\ndog\t0.25\n";
        let table = WordWeightTable::from_tsv(input.as_bytes()).unwrap();
        assert_eq!(table.len(), 2);
        assert_eq!(table.id_of("cat"), Some(0));
        assert_eq!(table.id_of("dog"), Some(1));
        assert!((table.weight(0).unwrap() - 0.5 * 2.0f64.ln()).abs() < 1e-15);
        assert!(WordWeightTable::from_tsv("cat 0.5\n".as_bytes()).is_err());
        assert!(WordWeightTable::from_tsv("cat\t1.5\n".as_bytes()).is_err());
    }
}
