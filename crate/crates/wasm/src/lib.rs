//! Browser bindings for the sliding-window submodular maximization demo.
//!
//! Three operations back the static page in `www/`:
//! - [`compare_algorithms`]: per-slide utility and footprint curves for the
//!   checkpointed window, the pruned index, and the greedy baseline on the
//!   same synthetic stream.
//! - [`estimate_grid`]: evolution of one append-only instance's estimate
//!   grid (bounds, candidate estimates, candidate fills).
//! - [`checkpoint_trace`]: positions and utilities of the pruned index's
//!   checkpoints over time.
//!
//! All inputs and outputs are JSON strings; the page does the drawing.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use smdk::baselines::ceg;
use smdk::element::{Element, KnapsackSpec};
use smdk::harness::GenSpec;
use smdk::knapstream::{BufferParams, KnapStream};
use smdk::oracle::BoxedOracle;
use smdk::{KnapWindow, KnapWindowPlus};

const MAX_STREAM: usize = 200_000;
const MAX_CEG_WINDOW: usize = 5_000;

fn err(message: impl std::fmt::Display) -> String {
    message.to_string()
}

#[derive(Deserialize)]
#[serde(default)]
struct DemoParams {
    utility: String,
    n: usize,
    window: usize,
    slide: usize,
    lambda: f64,
    beta: f64,
    d: usize,
    seed: u64,
    cost_lo: f64,
    cost_hi: f64,
    with_baseline: bool,
}

impl Default for DemoParams {
    fn default() -> Self {
        Self {
            utility: "modular".into(),
            n: 6_000,
            window: 600,
            slide: 10,
            lambda: 0.1,
            beta: 0.1,
            d: 1,
            seed: 7,
            cost_lo: 0.05,
            cost_hi: 0.2,
            with_baseline: true,
        }
    }
}

impl DemoParams {
    fn parse(json: &str) -> Result<Self, String> {
        let params: DemoParams = serde_json::from_str(json).map_err(err)?;
        if params.n == 0 || params.n > MAX_STREAM {
            return Err(err(format!("n must be in 1..={MAX_STREAM}")));
        }
        if params.window == 0 || params.slide == 0 || params.slide > params.window {
            return Err(err("need 1 <= slide <= window"));
        }
        if params.with_baseline && params.window > MAX_CEG_WINDOW {
            return Err(err(format!(
                "baseline recomputation is capped at window {MAX_CEG_WINDOW}; disable it for larger windows"
            )));
        }
        Ok(params)
    }

    fn gen_spec(&self) -> Result<GenSpec, String> {
        let costs: String = (0..self.d)
            .map(|_| format!("iid({},{})", self.cost_lo, self.cost_hi))
            .collect::<Vec<_>>()
            .join(";");
        let family = match self.utility.as_str() {
            "modular" => format!("modular,n={},costs={costs}", self.n),
            "ivm" => format!("vectors,n={},dim=3,costs={costs}", self.n),
            "bmc" => format!("items,n={},universe=400,size=4,costs={costs}", self.n),
            "coverage" => format!("tokens,n={},vocab=300,len=8,costs={costs}", self.n),
            other => return Err(err(format!("unknown utility `{other}`"))),
        };
        GenSpec::parse(&family).map_err(err)
    }

    fn oracle(&self, spec: &GenSpec) -> Result<BoxedOracle, String> {
        use smdk::utility::{BmcOracle, CoverageOracle, IvmOracle, ModularOracle};
        Ok(match self.utility.as_str() {
            "modular" => Box::new(ModularOracle::new()),
            "ivm" => Box::new(IvmOracle::with_defaults()),
            "bmc" => Box::new(BmcOracle::new()),
            "coverage" => {
                let table = spec.weight_table().ok_or_else(|| err("no vocabulary"))?;
                Box::new(CoverageOracle::new(std::sync::Arc::new(table)))
            }
            other => return Err(err(format!("unknown utility `{other}`"))),
        })
    }
}

#[derive(Serialize, Default)]
struct CompareSlide {
    t: u64,
    kw: f64,
    kwplus: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<f64>,
    kw_checkpoints: usize,
    kwplus_checkpoints: usize,
    kw_stored: usize,
    kwplus_stored: usize,
}

#[derive(Serialize)]
struct CompareOutput {
    slides: Vec<CompareSlide>,
    window: usize,
}

/// Runs the two sliding-window algorithms (and optionally the greedy
/// baseline) over one synthetic stream; one output point per slide.
#[wasm_bindgen]
pub fn compare_algorithms(params_json: &str) -> Result<String, JsError> {
    compare_algorithms_impl(params_json).map_err(|e| JsError::new(&e))
}

fn compare_algorithms_impl(params_json: &str) -> Result<String, String> {
    let params = DemoParams::parse(params_json)?;
    let gen = params.gen_spec()?;
    let elements = gen.generate(params.seed).map_err(err)?;
    let oracle = params.oracle(&gen)?;
    let spec = KnapsackSpec::new(params.d).map_err(err)?;

    let interval = smdk::knapwindow::default_interval(params.window, params.slide)
        .min(params.window as u64);
    let mut kw = KnapWindow::new(
        params.window,
        interval,
        params.lambda,
        spec,
        oracle.boxed_clone(),
    )
    .map_err(err)?;
    let mut kwp = KnapWindowPlus::new(
        params.window,
        params.lambda,
        params.beta,
        BufferParams::default(),
        spec,
        oracle.boxed_clone(),
    )
    .map_err(err)?;
    let mut stored: VecDeque<Element> = VecDeque::new();

    let mut slides = Vec::new();
    for batch in elements.chunks(params.slide) {
        for e in batch {
            kw.process(e).map_err(err)?;
        }
        kwp.process_batch(batch).map_err(err)?;
        let baseline = if params.with_baseline {
            for e in batch {
                stored.push_back(e.clone());
                if stored.len() > params.window {
                    stored.pop_front();
                }
            }
            let window: Vec<Element> = stored.iter().cloned().collect();
            Some(ceg(&window, &spec, &oracle).utility())
        } else {
            None
        };
        slides.push(CompareSlide {
            t: batch.last().expect("nonempty batch").ordinal(),
            kw: kw.query().utility(),
            kwplus: kwp.query().utility(),
            baseline,
            kw_checkpoints: kw.checkpoint_count(),
            kwplus_checkpoints: kwp.checkpoint_count(),
            kw_stored: kw.stored_elements(),
            kwplus_stored: kwp.stored_elements(),
        });
    }
    serde_json::to_string(&CompareOutput {
        slides,
        window: params.window,
    })
    .map_err(err)
}

#[derive(Serialize)]
struct GridSnapshot {
    t: u64,
    lower: f64,
    upper: f64,
    estimates: Vec<f64>,
    utilities: Vec<f64>,
    sizes: Vec<usize>,
    best: f64,
}

/// Evolution of a single append-only instance's estimate grid over the
/// first `n` elements (capped for drawing).
#[wasm_bindgen]
pub fn estimate_grid(params_json: &str) -> Result<String, JsError> {
    estimate_grid_impl(params_json).map_err(|e| JsError::new(&e))
}

fn estimate_grid_impl(params_json: &str) -> Result<String, String> {
    let mut params = DemoParams::parse(params_json)?;
    params.n = params.n.min(2_000);
    let gen = params.gen_spec()?;
    let elements = gen.generate(params.seed).map_err(err)?;
    let oracle = params.oracle(&gen)?;
    let spec = KnapsackSpec::new(params.d).map_err(err)?;
    let mut ks = KnapStream::new(1, params.lambda, spec, oracle).map_err(err)?;

    let mut snapshots = Vec::new();
    for e in &elements {
        ks.process(e).map_err(err)?;
        let (lower, upper) = ks.bounds();
        let summaries = ks.candidate_summaries();
        snapshots.push(GridSnapshot {
            t: e.ordinal(),
            lower,
            upper: upper * (1.0 + params.d as f64),
            estimates: summaries.iter().map(|c| c.phi).collect(),
            utilities: summaries.iter().map(|c| c.utility).collect(),
            sizes: summaries.iter().map(|c| c.size).collect(),
            best: ks.best_utility(),
        });
    }
    serde_json::to_string(&snapshots).map_err(err)
}

#[derive(Serialize)]
struct CheckpointSnapshot {
    t: u64,
    window_start: u64,
    positions: Vec<u64>,
    utilities: Vec<f64>,
    stored: usize,
}

/// Positions and utilities of the pruned index's checkpoints after every
/// slide: the raw material for the step chart.
#[wasm_bindgen]
pub fn checkpoint_trace(params_json: &str) -> Result<String, JsError> {
    checkpoint_trace_impl(params_json).map_err(|e| JsError::new(&e))
}

fn checkpoint_trace_impl(params_json: &str) -> Result<String, String> {
    let params = DemoParams::parse(params_json)?;
    let gen = params.gen_spec()?;
    let elements = gen.generate(params.seed).map_err(err)?;
    let oracle = params.oracle(&gen)?;
    let spec = KnapsackSpec::new(params.d).map_err(err)?;
    let mut kwp = KnapWindowPlus::new(
        params.window,
        params.lambda,
        params.beta,
        BufferParams::default(),
        spec,
        oracle,
    )
    .map_err(err)?;

    let mut snapshots = Vec::new();
    for batch in elements.chunks(params.slide) {
        kwp.process_batch(batch).map_err(err)?;
        let t = batch.last().expect("nonempty batch").ordinal();
        snapshots.push(CheckpointSnapshot {
            t,
            window_start: (t + 1).saturating_sub(params.window as u64).max(1),
            positions: kwp.checkpoint_positions(),
            utilities: kwp.checkpoint_utilities(),
            stored: kwp.stored_elements(),
        });
    }
    serde_json::to_string(&snapshots).map_err(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compare_produces_one_point_per_slide() {
        let json = compare_algorithms_impl(
            r#"{"utility":"modular","n":400,"window":80,"slide":8,"seed":3}"#,
        )
        .unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        let slides = parsed["slides"].as_array().unwrap();
        assert_eq!(slides.len(), 50);
        assert!(slides.iter().all(|s| s["kwplus"].as_f64().unwrap() >= 0.0));
        assert!(slides.iter().all(|s| s["baseline"].as_f64().is_some()));
    }

    #[test]
    fn grid_snapshots_track_bounds() {
        let json =
            estimate_grid_impl(r#"{"utility":"modular","n":50,"window":50,"slide":1,"seed":1}"#)
                .unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        let snaps = parsed.as_array().unwrap();
        assert_eq!(snaps.len(), 50);
        let last = snaps.last().unwrap();
        assert!(last["upper"].as_f64().unwrap() >= last["lower"].as_f64().unwrap());
        assert!(!last["estimates"].as_array().unwrap().is_empty());
    }

    #[test]
    fn checkpoint_trace_respects_the_window() {
        let json = checkpoint_trace_impl(
            r#"{"utility":"modular","n":900,"window":120,"slide":6,"seed":5}"#,
        )
        .unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        for snap in parsed.as_array().unwrap() {
            let start = snap["window_start"].as_u64().unwrap();
            let positions = snap["positions"].as_array().unwrap();
            // All checkpoints except possibly the first are inside the window.
            for p in positions.iter().skip(1) {
                assert!(p.as_u64().unwrap() >= start);
            }
            assert!(positions.len() <= 40);
        }
    }

    #[test]
    fn bad_params_are_rejected() {
        assert!(compare_algorithms_impl("{\"n\":0}").is_err());
        assert!(compare_algorithms_impl("{\"utility\":\"nope\"}").is_err());
        assert!(compare_algorithms_impl("{\"window\":9000}").is_err());
    }
}
