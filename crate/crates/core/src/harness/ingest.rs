//! File ingestion: JSONL records for any utility, CSV for feature vectors.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::element::{Element, Payload};
use crate::error::{Error, Result};
use crate::harness::config::UtilityKind;
use crate::harness::costs::{CostSpec, ElementAttrs};
use crate::utility::WordWeightTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IngestFormat {
    Jsonl,
    Csv,
}

impl std::str::FromStr for IngestFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(Self::Jsonl),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidConfig(format!(
                "unknown input format `{other}` (expected jsonl or csv)"
            ))),
        }
    }
}

#[derive(Deserialize)]
struct RawRecord {
    payload: RawPayload,
    #[serde(default)]
    costs: Option<Vec<f64>>,
    #[serde(default)]
    followers: Option<u64>,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawPayload {
    Tokens(BTreeMap<String, u32>),
    Features(Vec<f64>),
    Items(Vec<u32>),
    Value(f64),
}

/// Reads a stream from disk. Elements get ordinals 1..n in file order.
/// Costs come from the record when present, otherwise from the scheme;
/// having neither is an error, as is a record that does not match the
/// utility's payload type.
pub fn ingest_file(
    path: &Path,
    format: IngestFormat,
    utility: UtilityKind,
    d: usize,
    costs: Option<&CostSpec>,
    table: Option<&Arc<WordWeightTable>>,
    seed: u64,
) -> Result<Vec<Element>> {
    let file = File::open(path)?;
    match format {
        IngestFormat::Jsonl => ingest_jsonl(BufReader::new(file), utility, d, costs, table, seed),
        IngestFormat::Csv => ingest_csv(file, utility, d, costs, seed),
    }
}

fn ingest_jsonl(
    reader: impl BufRead,
    utility: UtilityKind,
    d: usize,
    costs: Option<&CostSpec>,
    table: Option<&Arc<WordWeightTable>>,
    seed: u64,
) -> Result<Vec<Element>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut elements = Vec::new();
    // Words outside the table get fresh zero-weight ids, stable per word.
    let mut unknown: HashMap<String, u32> = HashMap::new();
    let mut warned_unknown = false;
    let mut feature_dim: Option<usize> = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let at = |msg: String| Error::Ingest {
            line: i + 1,
            msg,
        };
        let record: RawRecord =
            serde_json::from_str(&line).map_err(|e| at(format!("bad record: {e}")))?;
        let mut attrs = ElementAttrs {
            length: None,
            followers: record.followers,
        };
        let payload = match (utility, record.payload) {
            (UtilityKind::Coverage, RawPayload::Tokens(bag)) => {
                let table = table.ok_or_else(|| {
                    at("coverage ingestion needs a vocabulary table".to_string())
                })?;
                let mut ids: Vec<(u32, u32)> = Vec::with_capacity(bag.len());
                let mut total = 0u64;
                for (word, count) in bag {
                    total += u64::from(count);
                    let id = match table.id_of(&word) {
                        Some(id) => id,
                        None => {
                            if !warned_unknown {
                                eprintln!(
                                    "ingest: word `{word}` not in vocabulary, weight 0 (line {})",
                                    i + 1
                                );
                                warned_unknown = true;
                            }
                            let next = table.len() as u32 + unknown.len() as u32;
                            *unknown.entry(word).or_insert(next)
                        }
                    };
                    match ids.binary_search_by_key(&id, |(w, _)| *w) {
                        Ok(pos) => ids[pos].1 += count,
                        Err(pos) => ids.insert(pos, (id, count)),
                    }
                }
                attrs.length = Some(total);
                Payload::Tokens(Arc::new(ids))
            }
            (UtilityKind::Ivm, RawPayload::Features(v)) => {
                match feature_dim {
                    Some(dim) if dim != v.len() => {
                        return Err(at(format!(
                            "feature vector of length {} after earlier length {dim}",
                            v.len()
                        )))
                    }
                    None => feature_dim = Some(v.len()),
                    _ => {}
                }
                Payload::Features(Arc::new(v))
            }
            (UtilityKind::Bmc, RawPayload::Items(items)) => Payload::Items(Arc::new(items)),
            (UtilityKind::Modular, RawPayload::Value(v)) => {
                if v < 0.0 || !v.is_finite() {
                    return Err(at(format!("modular value {v} must be >= 0")));
                }
                Payload::Value(v)
            }
            (kind, _) => {
                return Err(at(format!("payload does not match the {kind} utility")));
            }
        };
        let cost_vector = match record.costs {
            Some(c) => {
                if c.len() != d {
                    return Err(at(format!("{} costs, expected {d}", c.len())));
                }
                c
            }
            None => match costs {
                Some(spec) => spec
                    .assign(&attrs, &mut rng)
                    .map_err(|e| at(e.to_string()))?,
                None => {
                    return Err(at(
                        "record has no costs and no cost scheme is configured".to_string()
                    ))
                }
            },
        };
        let element = Element::new(elements.len() as u64 + 1, payload, cost_vector)
            .map_err(|e| at(e.to_string()))?;
        elements.push(element);
    }
    Ok(elements)
}

/// CSV of feature vectors: with a cost scheme configured every column is a
/// feature; otherwise the first d columns are costs and the rest features.
fn ingest_csv(
    reader: impl Read,
    utility: UtilityKind,
    d: usize,
    costs: Option<&CostSpec>,
    seed: u64,
) -> Result<Vec<Element>> {
    if utility != UtilityKind::Ivm {
        return Err(Error::InvalidConfig(
            "csv ingestion carries feature vectors; use it with the ivm utility".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_reader(reader);
    let mut elements = Vec::new();
    for (i, row) in csv_reader.records().enumerate() {
        let row = row?;
        let at = |msg: String| Error::Ingest {
            line: i + 1,
            msg,
        };
        let numbers: Vec<f64> = row
            .iter()
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|e| at(format!("bad number `{cell}`: {e}")))
            })
            .collect::<Result<_>>()?;
        let (cost_vector, features) = match costs {
            Some(spec) => {
                let c = spec
                    .assign(&ElementAttrs::default(), &mut rng)
                    .map_err(|e| at(e.to_string()))?;
                (c, numbers)
            }
            None => {
                if numbers.len() <= d {
                    return Err(at(format!(
                        "row has {} columns, need {d} costs plus features",
                        numbers.len()
                    )));
                }
                let features = numbers[d..].to_vec();
                (numbers[..d].to_vec(), features)
            }
        };
        let element = Element::new(
            elements.len() as u64 + 1,
            Payload::Features(Arc::new(features)),
            cost_vector,
        )
        .map_err(|e| at(e.to_string()))?;
        elements.push(element);
    }
    Ok(elements)
}
