//! Cost-assignment schemes. One scheme per knapsack dimension; schemes
//! compose left to right into the element's d-dimensional cost vector.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Per-element attributes some schemes depend on.
#[derive(Debug, Clone, Copy, Default)]
pub struct ElementAttrs {
    /// Number of words (token occurrences) in the element.
    pub length: Option<u64>,
    /// Follower count of the posting user.
    pub followers: Option<u64>,
}

#[derive(Debug, Clone)]
pub enum CostScheme {
    /// Uniform cost 1/k, bounding the solution size by k.
    UniformK { k: f64 },
    /// Length-proportional cost (1/k) * (l / avg_len).
    Length { k: f64, avg_len: f64 },
    /// Influence-based cost: monotone decreasing in the follower count,
    /// clamped to [1/(10k), cap]. Users with no followers pay the cap.
    Influence { k: f64, cap: f64, avg_followers: f64 },
    /// Independent uniform draw from [lo, hi].
    IidUniform { lo: f64, hi: f64 },
    /// Constant cost.
    Fixed { value: f64 },
}

impl CostScheme {
    fn name(&self) -> &'static str {
        match self {
            CostScheme::UniformK { .. } => "uniform",
            CostScheme::Length { .. } => "length",
            CostScheme::Influence { .. } => "influence",
            CostScheme::IidUniform { .. } => "iid",
            CostScheme::Fixed { .. } => "fixed",
        }
    }

    fn assign(&self, attrs: &ElementAttrs, rng: &mut ChaCha8Rng) -> Result<f64> {
        let value = match self {
            CostScheme::UniformK { k } => 1.0 / k,
            CostScheme::Length { k, avg_len } => {
                let l = attrs.length.ok_or_else(|| {
                    Error::InvalidConfig(
                        "length cost scheme needs a token payload or a length attribute".into(),
                    )
                })?;
                (1.0 / k) * (l as f64 / avg_len)
            }
            CostScheme::Influence {
                k,
                cap,
                avg_followers,
            } => {
                let fl = attrs.followers.unwrap_or(0) as f64;
                let raw = cap * (1.0 + avg_followers).ln() / (2.0 + fl).ln();
                raw.clamp(1.0 / (10.0 * k), *cap)
            }
            CostScheme::IidUniform { lo, hi } => rng.random_range(*lo..=*hi),
            CostScheme::Fixed { value } => *value,
        };
        if !(value > 0.0 && value <= 1.0) || !value.is_finite() {
            return Err(Error::SchemeOutOfRange {
                scheme: self.name().to_string(),
                value,
            });
        }
        Ok(value)
    }
}

/// An ordered list of schemes, one per knapsack.
#[derive(Debug, Clone)]
pub struct CostSpec(pub Vec<CostScheme>);

impl CostSpec {
    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    /// Builds the element's cost vector. Draws for random schemes come from
    /// the provided stream RNG, so a fixed seed reproduces costs exactly.
    pub fn assign(&self, attrs: &ElementAttrs, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        self.0.iter().map(|s| s.assign(attrs, rng)).collect()
    }

    /// Parses a semicolon-separated scheme list, e.g.
    /// `uniform(10);length(10,5);iid(0.02,0.08)`.
    pub fn parse(input: &str) -> Result<Self> {
        let mut schemes = Vec::new();
        for part in input.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            schemes.push(parse_scheme(part)?);
        }
        if schemes.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "no cost scheme found in `{input}`"
            )));
        }
        Ok(Self(schemes))
    }
}

fn parse_scheme(part: &str) -> Result<CostScheme> {
    let bad = |msg: &str| Error::InvalidConfig(format!("cost scheme `{part}`: {msg}"));
    let (name, rest) = match part.split_once('(') {
        Some((name, rest)) => {
            let rest = rest
                .strip_suffix(')')
                .ok_or_else(|| bad("missing closing parenthesis"))?;
            (name.trim(), rest)
        }
        None => (part, ""),
    };
    let args: Vec<f64> = rest
        .split(',')
        .filter(|a| !a.trim().is_empty())
        .map(|a| {
            a.trim()
                .parse::<f64>()
                .map_err(|e| bad(&format!("bad number `{a}`: {e}")))
        })
        .collect::<Result<_>>()?;
    let want = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(bad(&format!("expected {n} argument(s), got {}", args.len())))
        }
    };
    match name {
        "uniform" | "uniform_k" => {
            want(1)?;
            Ok(CostScheme::UniformK { k: args[0] })
        }
        "length" | "len" => {
            want(2)?;
            Ok(CostScheme::Length {
                k: args[0],
                avg_len: args[1],
            })
        }
        "influence" | "infl" => {
            want(3)?;
            Ok(CostScheme::Influence {
                k: args[0],
                cap: args[1],
                avg_followers: args[2],
            })
        }
        "iid" | "iid_uniform" => {
            want(2)?;
            if args[0] > args[1] {
                return Err(bad("lo exceeds hi"));
            }
            Ok(CostScheme::IidUniform {
                lo: args[0],
                hi: args[1],
            })
        }
        "fixed" => {
            want(1)?;
            Ok(CostScheme::Fixed { value: args[0] })
        }
        other => Err(bad(&format!("unknown scheme `{other}`"))),
    }
}
