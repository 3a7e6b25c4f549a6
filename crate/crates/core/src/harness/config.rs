//! Experiment configuration shared by the CLI and the test harness.

use std::path::PathBuf;
use std::sync::Arc;

use crate::baselines::BRUTE_FORCE_CAP;
use crate::error::{Error, Result};
use crate::harness::costs::CostSpec;
use crate::harness::generate::GenSpec;
use crate::harness::ingest::IngestFormat;
use crate::knapwindow::default_interval;
use crate::oracle::BoxedOracle;
use crate::utility::ivm;
use crate::utility::{BmcOracle, CoverageOracle, IvmOracle, ModularOracle, WordWeightTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Ks,
    Kw,
    KwPlus,
    Ceg,
    Brute,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Ks => "ks",
            Algorithm::Kw => "kw",
            Algorithm::KwPlus => "kwplus",
            Algorithm::Ceg => "ceg",
            Algorithm::Brute => "brute",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ks" => Ok(Self::Ks),
            "kw" => Ok(Self::Kw),
            "kwplus" => Ok(Self::KwPlus),
            "ceg" => Ok(Self::Ceg),
            "brute" => Ok(Self::Brute),
            other => Err(Error::InvalidConfig(format!(
                "unknown algorithm `{other}` (expected ks|kw|kwplus|ceg|brute)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UtilityKind {
    Coverage,
    Ivm,
    Bmc,
    Modular,
}

impl std::fmt::Display for UtilityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            UtilityKind::Coverage => "coverage",
            UtilityKind::Ivm => "ivm",
            UtilityKind::Bmc => "bmc",
            UtilityKind::Modular => "modular",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for UtilityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coverage" => Ok(Self::Coverage),
            "ivm" => Ok(Self::Ivm),
            "bmc" => Ok(Self::Bmc),
            "modular" => Ok(Self::Modular),
            other => Err(Error::InvalidConfig(format!(
                "unknown utility `{other}` (expected coverage|ivm|bmc|modular)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum StreamSource {
    File { path: PathBuf, format: IngestFormat },
    Generated(GenSpec),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub utility: UtilityKind,
    pub window: usize,
    /// Elements per window slide (T). Default 0.01% of W, at least 1.
    pub slide: usize,
    /// Checkpoint interval override; default ceil(sqrt(W * T)).
    pub interval: Option<u64>,
    pub lambda: f64,
    pub beta: f64,
    pub alpha: f64,
    pub eta: usize,
    pub d: usize,
    pub sigma: f64,
    pub bandwidth: f64,
    pub seed: u64,
    pub source: StreamSource,
    /// Cost scheme for records without explicit costs.
    pub costs: Option<CostSpec>,
    /// Vocabulary file for coverage ingestion.
    pub vocab: Option<PathBuf>,
}

pub fn default_slide(window: usize) -> usize {
    ((window as f64 * 0.0001).ceil() as usize).max(1)
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, utility: UtilityKind, window: usize, source: StreamSource) -> Self {
        Self {
            algorithm,
            utility,
            window,
            slide: default_slide(window),
            interval: None,
            lambda: 0.1,
            beta: 0.1,
            alpha: 0.5,
            eta: 20,
            d: 1,
            sigma: ivm::DEFAULT_SIGMA,
            bandwidth: ivm::DEFAULT_BANDWIDTH,
            seed: 0,
            source,
            costs: None,
            vocab: None,
        }
    }

    pub fn effective_interval(&self) -> u64 {
        self.interval
            .unwrap_or_else(|| default_interval(self.window, self.slide))
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidConfig("window must be >= 1".into()));
        }
        if self.slide == 0 || self.slide > self.window {
            return Err(Error::InvalidConfig(format!(
                "slide T = {} must satisfy 1 <= T <= W = {}",
                self.slide, self.window
            )));
        }
        for (name, rate) in [
            ("lambda", self.lambda),
            ("beta", self.beta),
            ("alpha", self.alpha),
        ] {
            if !(rate > 0.0 && rate < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {rate} must be in (0, 1)"
                )));
            }
        }
        if self.eta == 0 {
            return Err(Error::InvalidConfig("eta must be >= 1".into()));
        }
        if self.d == 0 {
            return Err(Error::InvalidConfig("d must be >= 1".into()));
        }
        if let Some(costs) = &self.costs {
            if costs.dimension() != self.d {
                return Err(Error::InvalidConfig(format!(
                    "cost scheme has {} dimension(s) but d = {}",
                    costs.dimension(),
                    self.d
                )));
            }
        }
        if self.algorithm == Algorithm::Brute && self.window > BRUTE_FORCE_CAP {
            return Err(Error::InvalidConfig(format!(
                "brute force enumerates 2^W subsets; W = {} exceeds the cap of {BRUTE_FORCE_CAP}. \
                 Use a window of at most {BRUTE_FORCE_CAP} or a different algorithm",
                self.window
            )));
        }
        if self.utility == UtilityKind::Coverage {
            let has_table = self.vocab.is_some()
                || matches!(&self.source, StreamSource::Generated(g) if g.weight_table().is_some());
            if !has_table {
                return Err(Error::InvalidConfig(
                    "coverage needs --vocab for file input (generated token streams derive it)"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    /// Loads the vocabulary table if this run needs one.
    pub fn load_table(&self) -> Result<Option<Arc<WordWeightTable>>> {
        if self.utility != UtilityKind::Coverage {
            return Ok(None);
        }
        if let Some(path) = &self.vocab {
            let file = std::fs::File::open(path)?;
            let table = WordWeightTable::from_tsv(std::io::BufReader::new(file))?;
            return Ok(Some(Arc::new(table)));
        }
        if let StreamSource::Generated(g) = &self.source {
            if let Some(table) = g.weight_table() {
                return Ok(Some(Arc::new(table)));
            }
        }
        Err(Error::InvalidConfig(
            "coverage needs a vocabulary table".into(),
        ))
    }

    pub fn build_oracle(&self, table: Option<&Arc<WordWeightTable>>) -> Result<BoxedOracle> {
        Ok(match self.utility {
            UtilityKind::Modular => Box::new(ModularOracle::new()),
            UtilityKind::Bmc => Box::new(BmcOracle::new()),
            UtilityKind::Ivm => Box::new(IvmOracle::new(self.sigma, self.bandwidth)),
            UtilityKind::Coverage => {
                let table = table.ok_or_else(|| {
                    Error::InvalidConfig("coverage needs a vocabulary table".into())
                })?;
                Box::new(CoverageOracle::new(table.clone()))
            }
        })
    }
}
