//! Seeded synthetic stream generation: desk-scale stand-ins for the large
//! social-post and weblog streams the algorithms target.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::element::{Element, Payload};
use crate::error::{Error, Result};
use crate::harness::costs::{CostSpec, ElementAttrs};
use crate::utility::WordWeightTable;

#[derive(Debug, Clone)]
pub enum PayloadFamily {
    /// Token bags over a Zipfian vocabulary.
    Tokens { vocab: usize, zipf: f64, len: usize },
    /// Feature vectors uniform in the unit box.
    Vectors { dim: usize },
    /// Random item-id sets.
    Items { universe: u32, size: usize },
    /// Modular self-utilities uniform in (0, vmax].
    Modular { vmax: f64 },
}

#[derive(Debug, Clone)]
pub struct GenSpec {
    pub n: usize,
    pub family: PayloadFamily,
    pub costs: CostSpec,
}

impl GenSpec {
    /// Parses `family,key=value,...`, e.g.
    /// `vectors,n=1000,dim=5,costs=iid(0.02,0.08)` or
    /// `tokens,n=500,vocab=200,zipf=1.1,len=8,costs=uniform(20)`.
    pub fn parse(input: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidConfig(format!("generator spec `{input}`: {msg}"));
        let mut parts = split_top_level(input);
        if parts.is_empty() {
            return Err(bad("empty spec".into()));
        }
        let family_name = parts.remove(0);
        let mut n = 1000usize;
        let mut vocab = 1000usize;
        let mut zipf = 1.1f64;
        let mut len = 8usize;
        let mut dim = 5usize;
        let mut universe = 1000u32;
        let mut size = 5usize;
        let mut vmax = 1.0f64;
        let mut costs = CostSpec::parse("iid(0.02,0.08)").expect("default cost spec parses");
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got `{part}`")))?;
            let value = value.trim();
            match key.trim() {
                "n" => n = value.parse().map_err(|e| bad(format!("n: {e}")))?,
                "vocab" => vocab = value.parse().map_err(|e| bad(format!("vocab: {e}")))?,
                "zipf" => zipf = value.parse().map_err(|e| bad(format!("zipf: {e}")))?,
                "len" => len = value.parse().map_err(|e| bad(format!("len: {e}")))?,
                "dim" => dim = value.parse().map_err(|e| bad(format!("dim: {e}")))?,
                "universe" => {
                    universe = value.parse().map_err(|e| bad(format!("universe: {e}")))?
                }
                "size" => size = value.parse().map_err(|e| bad(format!("size: {e}")))?,
                "vmax" => vmax = value.parse().map_err(|e| bad(format!("vmax: {e}")))?,
                "costs" => costs = CostSpec::parse(value)?,
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        let family = match family_name.trim() {
            "tokens" => PayloadFamily::Tokens { vocab, zipf, len },
            "vectors" => PayloadFamily::Vectors { dim },
            "items" => PayloadFamily::Items { universe, size },
            "modular" => PayloadFamily::Modular { vmax },
            other => return Err(bad(format!("unknown payload family `{other}`"))),
        };
        Ok(Self { n, family, costs })
    }

    pub fn dimension(&self) -> usize {
        self.costs.dimension()
    }

    /// Deterministic stream: a fixed seed yields identical elements.
    pub fn generate(&self, seed: u64) -> Result<Vec<Element>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zipf_cdf = match &self.family {
            PayloadFamily::Tokens { vocab, zipf, .. } => Some(zipf_cumulative(*vocab, *zipf)),
            _ => None,
        };
        let mut elements = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let (payload, attrs) = match &self.family {
                PayloadFamily::Tokens { len, .. } => {
                    let cdf = zipf_cdf.as_ref().expect("tokens family has a cdf");
                    let mut bag: Vec<(u32, u32)> = Vec::new();
                    for _ in 0..*len {
                        let id = sample_cdf(cdf, &mut rng);
                        match bag.binary_search_by_key(&id, |(w, _)| *w) {
                            Ok(pos) => bag[pos].1 += 1,
                            Err(pos) => bag.insert(pos, (id, 1)),
                        }
                    }
                    (
                        Payload::Tokens(Arc::new(bag)),
                        ElementAttrs {
                            length: Some(*len as u64),
                            followers: None,
                        },
                    )
                }
                PayloadFamily::Vectors { dim } => {
                    let v: Vec<f64> = (0..*dim).map(|_| rng.random_range(0.0..1.0)).collect();
                    (Payload::Features(Arc::new(v)), ElementAttrs::default())
                }
                PayloadFamily::Items { universe, size } => {
                    let mut items: Vec<u32> =
                        (0..*size).map(|_| rng.random_range(0..*universe)).collect();
                    items.sort_unstable();
                    items.dedup();
                    (Payload::Items(Arc::new(items)), ElementAttrs::default())
                }
                PayloadFamily::Modular { vmax } => {
                    let v = rng.random_range(0.0..*vmax);
                    (Payload::Value(v), ElementAttrs::default())
                }
            };
            let costs = self.costs.assign(&attrs, &mut rng)?;
            elements.push(Element::new(i as u64 + 1, payload, costs)?);
        }
        Ok(elements)
    }

    /// The Zipfian vocabulary of a tokens stream as (word, probability)
    /// pairs; a pure function of this generator spec, independent of the seed. Words
    /// are named `w0`, `w1`, ... in rank order.
    pub fn vocabulary(&self) -> Option<Vec<(String, f64)>> {
        match &self.family {
            PayloadFamily::Tokens { vocab, zipf, .. } => Some(
                zipf_probabilities(*vocab, *zipf)
                    .into_iter()
                    .enumerate()
                    .map(|(i, p)| (format!("w{i}"), p))
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Weight table matching [`GenSpec::vocabulary`].
    pub fn weight_table(&self) -> Option<WordWeightTable> {
        self.vocabulary().map(|entries| {
            WordWeightTable::from_probabilities(entries).expect("probabilities valid")
        })
    }
}

/// Splits on commas that are not nested inside parentheses.
fn split_top_level(input: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in input.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(input[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let tail = input[start..].trim();
    if !tail.is_empty() {
        parts.push(tail);
    }
    parts
}

fn zipf_probabilities(vocab: usize, skew: f64) -> Vec<f64> {
    let raw: Vec<f64> = (1..=vocab).map(|r| 1.0 / (r as f64).powf(skew)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn zipf_cumulative(vocab: usize, skew: f64) -> Vec<f64> {
    let mut acc = 0.0;
    zipf_probabilities(vocab, skew)
        .into_iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

fn sample_cdf(cdf: &[f64], rng: &mut ChaCha8Rng) -> u32 {
    let u: f64 = rng.random_range(0.0..1.0);
    cdf.partition_point(|&c| c <= u) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_match_requested_shape() {
        let spec = GenSpec::parse("vectors,n=1000,dim=5,costs=iid(0.02,0.08)").unwrap();
        let elements = spec.generate(42).unwrap();
        assert_eq!(elements.len(), 1000);
        assert_eq!(elements[0].ordinal(), 1);
        assert_eq!(elements[999].ordinal(), 1000);
        for e in &elements {
            match e.payload() {
                Payload::Features(v) => assert_eq!(v.len(), 5),
                other => panic!("unexpected payload {other:?}"),
            }
            assert_eq!(e.costs().len(), 1);
            assert!(e.costs()[0] >= 0.02 && e.costs()[0] <= 0.08);
        }
    }

    #[test]
    fn empty_stream() {
        let spec = GenSpec::parse("modular,n=0").unwrap();
        assert!(spec.generate(1).unwrap().is_empty());
    }

    #[test]
    fn same_seed_same_stream() {
        let spec = GenSpec::parse("tokens,n=50,vocab=30,len=6,costs=uniform(10)").unwrap();
        let a = spec.generate(9).unwrap();
        let b = spec.generate(9).unwrap();
        let serialize =
            |elements: &[Element]| serde_json::to_string(elements).expect("serializable");
        assert_eq!(serialize(&a), serialize(&b));
        let c = spec.generate(10).unwrap();
        assert_ne!(serialize(&a), serialize(&c));
    }

    #[test]
    fn token_weight_table_matches_vocab() {
        let spec = GenSpec::parse("tokens,n=10,vocab=25,len=4").unwrap();
        let table = spec.weight_table().unwrap();
        assert_eq!(table.len(), 25);
        assert_eq!(table.id_of("w0"), Some(0));
        assert_eq!(table.id_of("w24"), Some(24));
        assert!(GenSpec::parse("vectors,n=5").unwrap().weight_table().is_none());
    }

    #[test]
    fn parse_rejects_unknown_keys_and_families() {
        assert!(GenSpec::parse("mystery,n=5").is_err());
        assert!(GenSpec::parse("modular,m=5").is_err());
        assert!(GenSpec::parse("modular,n").is_err());
    }
}
