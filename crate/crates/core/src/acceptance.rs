//! The verification suite: every release-gating property of the library,
//! runnable through `verify` on the CLI or the `acceptance` test target.
//!
//! Approximation guarantees are checked against a brute-force optimum on
//! randomized small instances (zero violations allowed); structural bounds
//! and monotone reporting are checked exhaustively on those runs; oracle
//! correctness is checked against an independent dense log-determinant; the
//! efficiency and quality trends are checked on one larger synthetic stream.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{brute_force_opt, ApproxBound};
use crate::element::{Element, KnapsackSpec, Payload};
use crate::error::Result;
use crate::harness::config::{Algorithm, ExperimentConfig, StreamSource, UtilityKind};
use crate::harness::driver::run_experiment;
use crate::harness::generate::GenSpec;
use crate::knapstream::{BufferParams, KnapStream};
use crate::knapwindow::KnapWindow;
use crate::knapwindowplus::KnapWindowPlus;
use crate::oracle::{BoxedOracle, UtilityOracle};
use crate::utility::{BmcOracle, CoverageOracle, IvmOracle, ModularOracle, WordWeightTable};

/// Absolute slack when comparing float utilities against a theory bound.
const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {}: {} — {} [{}] ({:.1}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

pub fn all_ids() -> Vec<u32> {
    (1..=9).collect()
}

type CriterionFn = fn() -> Result<(bool, String)>;

pub fn run_criterion(id: u32) -> CriterionReport {
    let (name, body): (&'static str, CriterionFn) = match id {
        1 => ("single-pass approximation ratio", criterion1),
        2 => ("sliding-window approximation ratio", criterion2),
        3 => ("pruned-index approximation ratio", criterion3),
        4 => ("structural bounds", criterion4),
        5 => ("oracle correctness", criterion5),
        6 => ("prefix equivalence", criterion6),
        7 => ("monotone reporting", criterion7),
        8 => ("efficiency trend", criterion8),
        9 => ("solution-quality trend", criterion9),
        other => {
            return CriterionReport {
                id: other,
                name: "unknown criterion",
                passed: false,
                detail: "valid ids are 1..=9".into(),
                seconds: 0.0,
            }
        }
    };
    let started = Instant::now();
    let (passed, detail) = match body() {
        Ok(outcome) => outcome,
        Err(e) => (false, format!("errored: {e}")),
    };
    CriterionReport {
        id,
        name,
        passed,
        detail,
        seconds: started.elapsed().as_secs_f64(),
    }
}

pub fn run(ids: &[u32]) -> Vec<CriterionReport> {
    ids.iter().map(|&id| run_criterion(id)).collect()
}

pub fn run_all() -> Vec<CriterionReport> {
    run(&all_ids())
}

// ---------------------------------------------------------------------------
// Randomized trial instances
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
enum TrialUtility {
    Modular,
    Coverage,
}

struct TrialStream {
    elements: Vec<Element>,
    oracle: BoxedOracle,
    /// Largest cost over the whole stream (the realized delta bound).
    delta: f64,
}

fn trial_stream(seed: u64, n: usize, d: usize, kind: TrialUtility) -> TrialStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let oracle: BoxedOracle = match kind {
        TrialUtility::Modular => Box::new(ModularOracle::new()),
        TrialUtility::Coverage => {
            let weights: Vec<f64> = (0..20).map(|_| rng.random_range(0.2..1.0)).collect();
            Box::new(CoverageOracle::new(Arc::new(WordWeightTable::from_weights(
                weights,
            ))))
        }
    };
    let mut delta = 0.0f64;
    let mut elements = Vec::with_capacity(n);
    for i in 0..n {
        let payload = match kind {
            TrialUtility::Modular => Payload::Value(rng.random_range(0.2..3.0)),
            TrialUtility::Coverage => {
                let words = rng.random_range(1..=3usize);
                let mut bag: Vec<(u32, u32)> = Vec::new();
                for _ in 0..words {
                    let id = rng.random_range(0..20u32);
                    let count = rng.random_range(1..=2u32);
                    match bag.binary_search_by_key(&id, |(w, _)| *w) {
                        Ok(pos) => bag[pos].1 += count,
                        Err(pos) => bag.insert(pos, (id, count)),
                    }
                }
                Payload::Tokens(Arc::new(bag))
            }
        };
        let costs: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..=0.6)).collect();
        for &c in &costs {
            delta = delta.max(c);
        }
        elements.push(Element::new(i as u64 + 1, payload, costs).expect("valid trial element"));
    }
    TrialStream {
        elements,
        oracle,
        delta,
    }
}

fn trial_params(trial: u64) -> (usize, f64, TrialUtility) {
    let d = 1 + (trial % 2) as usize;
    let lambda = [0.05, 0.1, 0.25][(trial % 3) as usize];
    let kind = if (trial / 2).is_multiple_of(2) {
        TrialUtility::Modular
    } else {
        TrialUtility::Coverage
    };
    (d, lambda, kind)
}

// ---------------------------------------------------------------------------
// Criterion 1: KnapStream vs. brute force on 200 random instances
// ---------------------------------------------------------------------------

fn criterion1() -> Result<(bool, String)> {
    let mut violations = 0u32;
    let mut worst_ratio = f64::INFINITY;
    for trial in 0..200u64 {
        let (d, lambda, kind) = trial_params(trial);
        let mut rng = ChaCha8Rng::seed_from_u64(0xC1_0000 + trial);
        let n = rng.random_range(4..=15usize);
        let stream = trial_stream(0xA1_0000 + trial, n, d, kind);
        let spec = KnapsackSpec::new(d)?;

        let mut ks = KnapStream::new(1, lambda, spec, stream.oracle.boxed_clone())?;
        for e in &stream.elements {
            ks.process(e)?;
        }
        let achieved = ks.solution().utility();
        let opt = brute_force_opt(&stream.elements, &spec, &stream.oracle)?.utility();
        let bound = ApproxBound::new(lambda, 0.0, d, stream.delta)?.ks_bound;
        if achieved + BOUND_SLACK < bound * opt {
            violations += 1;
        }
        if opt > 0.0 {
            worst_ratio = worst_ratio.min(achieved / opt);
        }
    }
    Ok((
        violations == 0,
        format!("200 instances, {violations} violations, worst ratio {worst_ratio:.3}"),
    ))
}

// ---------------------------------------------------------------------------
// Criterion 2: KnapWindow bound at every slide of 100 random streams
// ---------------------------------------------------------------------------

const KW_TRIAL_N: usize = 40;
const KW_TRIAL_W: usize = 12;
const KW_TRIAL_L: u64 = 4;

fn criterion2() -> Result<(bool, String)> {
    let mut violations = 0u32;
    let mut checked = 0u32;
    for trial in 0..100u64 {
        let (d, lambda, kind) = trial_params(trial);
        let stream = trial_stream(0xA2_0000 + trial, KW_TRIAL_N, d, kind);
        let spec = KnapsackSpec::new(d)?;
        let bound = ApproxBound::new(lambda, 0.0, d, stream.delta)?.ks_bound;
        let mut kw = KnapWindow::new(KW_TRIAL_W, KW_TRIAL_L, lambda, spec, stream.oracle.boxed_clone())?;
        let mut window: VecDeque<Element> = VecDeque::new();
        for e in &stream.elements {
            kw.process(e)?;
            window.push_back(e.clone());
            if window.len() > KW_TRIAL_W {
                window.pop_front();
            }
            let active: Vec<Element> = window.iter().cloned().collect();
            let opt = brute_force_opt(&active, &spec, &stream.oracle)?.utility();
            let achieved = kw.query().utility();
            checked += 1;
            if achieved + BOUND_SLACK < bound * opt {
                violations += 1;
            }
        }
    }
    Ok((
        violations == 0,
        format!("{checked} window states, {violations} violations"),
    ))
}

// ---------------------------------------------------------------------------
// Criterion 3: KnapWindowPlus bound at every slide
// ---------------------------------------------------------------------------

fn criterion3() -> Result<(bool, String)> {
    let mut violations = 0u32;
    let mut checked = 0u32;
    for trial in 0..100u64 {
        let (d, lambda, kind) = trial_params(trial);
        let beta = [0.05, 0.1, 0.2][(trial % 3) as usize];
        let stream = trial_stream(0xA3_0000 + trial, KW_TRIAL_N, d, kind);
        let spec = KnapsackSpec::new(d)?;
        let bound = ApproxBound::new(lambda, beta, d, stream.delta)?.kwp_bound;
        let mut kwp = KnapWindowPlus::new(
            KW_TRIAL_W,
            lambda,
            beta,
            BufferParams::default(),
            spec,
            stream.oracle.boxed_clone(),
        )?;
        let mut window: VecDeque<Element> = VecDeque::new();
        for e in &stream.elements {
            kwp.process(e)?;
            window.push_back(e.clone());
            if window.len() > KW_TRIAL_W {
                window.pop_front();
            }
            let active: Vec<Element> = window.iter().cloned().collect();
            let opt = brute_force_opt(&active, &spec, &stream.oracle)?.utility();
            let achieved = kwp.query().utility();
            checked += 1;
            if achieved + BOUND_SLACK < bound * opt {
                violations += 1;
            }
        }
    }
    Ok((
        violations == 0,
        format!("{checked} window states, {violations} violations"),
    ))
}

// ---------------------------------------------------------------------------
// Criterion 4: structural bounds, exhaustively on criterion-2/3 runs
// ---------------------------------------------------------------------------

fn ks_candidate_bound(instance: &KnapStream, d: usize) -> usize {
    let gamma = instance.gamma_seen();
    if !gamma.is_finite() {
        return usize::MAX;
    }
    (((1.0 + d as f64) / gamma).log(1.0 + instance.lambda()).ceil() as usize) + 1
}

fn criterion4() -> Result<(bool, String)> {
    let mut failures: Vec<String> = Vec::new();
    let mut checks = 0u64;

    // KnapWindow runs: candidate-count and checkpoint-count bounds.
    for trial in 0..100u64 {
        let (d, lambda, kind) = trial_params(trial);
        let stream = trial_stream(0xA2_0000 + trial, KW_TRIAL_N, d, kind);
        let spec = KnapsackSpec::new(d)?;
        let mut kw = KnapWindow::new(KW_TRIAL_W, KW_TRIAL_L, lambda, spec, stream.oracle.boxed_clone())?;
        for e in &stream.elements {
            kw.process(e)?;
            let checkpoint_cap = KW_TRIAL_W.div_ceil(KW_TRIAL_L as usize) + 1;
            if kw.checkpoint_count() > checkpoint_cap {
                failures.push(format!(
                    "kw trial {trial}: {} checkpoints > {checkpoint_cap}",
                    kw.checkpoint_count()
                ));
            }
            for instance in kw.instances() {
                checks += 1;
                let cap = ks_candidate_bound(instance, d);
                if instance.candidate_count() > cap {
                    failures.push(format!(
                        "kw trial {trial}: {} candidates > {cap}",
                        instance.candidate_count()
                    ));
                }
            }
        }
    }

    // KnapWindowPlus runs: index-size bound and the deletion-rule fixpoint.
    for trial in 0..100u64 {
        let (d, lambda, kind) = trial_params(trial);
        let beta = [0.05, 0.1, 0.2][(trial % 3) as usize];
        let stream = trial_stream(0xA3_0000 + trial, KW_TRIAL_N, d, kind);
        let spec = KnapsackSpec::new(d)?;
        let mut kwp = KnapWindowPlus::new(
            KW_TRIAL_W,
            lambda,
            beta,
            BufferParams::default(),
            spec,
            stream.oracle.boxed_clone(),
        )?;
        for e in &stream.elements {
            kwp.process(e)?;
            checks += 1;
            for instance in kwp.instances() {
                let cap = ks_candidate_bound(instance, d);
                if instance.candidate_count() > cap {
                    failures.push(format!(
                        "kwp trial {trial}: {} candidates > {cap}",
                        instance.candidate_count()
                    ));
                }
            }
            let utilities = kwp.checkpoint_utilities();
            let s = utilities.len();
            let newest = *utilities.last().expect("at least one checkpoint");
            if newest > 0.0 {
                let theta: f64 = utilities[0] / newest;
                let cap = (2.0 * theta.ln() / (1.0 / (1.0 - beta)).ln()).ceil() as usize + 2;
                if s > cap {
                    failures.push(format!("kwp trial {trial}: {s} checkpoints > {cap}"));
                }
            }
            for i in 0..s.saturating_sub(2) {
                let near = utilities[i + 1] >= (1.0 - beta) * utilities[i];
                let far = utilities[i + 2] >= (1.0 - beta) * utilities[i];
                if near && far {
                    failures.push(format!("kwp trial {trial}: deletion rule violated at {i}"));
                }
            }
        }
    }

    let passed = failures.is_empty();
    let detail = if passed {
        format!("{checks} maintenance rounds, all bounds hold")
    } else {
        format!("{} violations; first: {}", failures.len(), failures[0])
    };
    Ok((passed, detail))
}

// ---------------------------------------------------------------------------
// Criterion 5: oracle correctness against independent routes
// ---------------------------------------------------------------------------

/// ln(det) via Gaussian elimination with partial pivoting; independent of
/// the Cholesky path inside the IVM oracle.
fn log_det_dense(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut log_det = 0.0;
    for col in 0..n {
        let mut pivot_row = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[pivot_row][col].abs() {
                pivot_row = row;
            }
        }
        a.swap(col, pivot_row);
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_vec = &upper[col];
        let pivot = pivot_vec[col];
        log_det += pivot.abs().ln();
        for row in lower {
            let factor = row[col] / pivot;
            for (value, pv) in row[col..].iter_mut().zip(&pivot_vec[col..]) {
                *value -= factor * pv;
            }
        }
    }
    log_det
}

fn ivm_matrix(points: &[Vec<f64>], sigma: f64, bandwidth: f64) -> Vec<Vec<f64>> {
    let inv_sigma_sq = 1.0 / (sigma * sigma);
    let inv_bw_sq = 1.0 / (bandwidth * bandwidth);
    let n = points.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let sq: f64 = points[i]
                        .iter()
                        .zip(&points[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    let k = (-sq * inv_bw_sq).exp();
                    inv_sigma_sq * k + if i == j { 1.0 } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

fn feature_element(ordinal: u64, coords: Vec<f64>) -> Element {
    Element::new(ordinal, Payload::Features(Arc::new(coords)), vec![0.2]).expect("valid")
}

fn criterion5() -> Result<(bool, String)> {
    let (sigma, bandwidth) = (1.0, 0.75);
    let mut worst_rel = 0.0f64;
    let mut failures = 0u32;
    for trial in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xA5_0000 + trial);
        let size = rng.random_range(0..=20usize);
        let dim = rng.random_range(1..=4usize);
        let points: Vec<Vec<f64>> = (0..size + 1)
            .map(|_| (0..dim).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let mut oracle = IvmOracle::new(sigma, bandwidth);
        for (i, p) in points[..size].iter().enumerate() {
            oracle.insert(&feature_element(i as u64 + 1, p.clone()));
        }
        let incremental = oracle.gain(&feature_element(size as u64 + 1, points[size].clone()));
        let with_v = 0.5 * log_det_dense(ivm_matrix(&points, sigma, bandwidth));
        let without_v = 0.5 * log_det_dense(ivm_matrix(&points[..size], sigma, bandwidth));
        let dense = with_v - without_v;
        let rel = (incremental - dense).abs() / dense.abs().max(1e-12);
        worst_rel = worst_rel.max(rel);
        if rel > 1e-8 {
            failures += 1;
        }
    }

    // Coverage and BMC: incremental state must equal a from-scratch
    // evaluation exactly, and the coverage total must match the direct
    // max-frequency formula.
    let mut exact_failures = 0u32;
    for trial in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xB5_0000 + trial);
        let stream = trial_stream(0xB5_1000 + trial, 50, 1, TrialUtility::Coverage);
        let mut oracle = stream.oracle.boxed_clone();
        let mut inserted: Vec<Element> = Vec::new();
        for e in &stream.elements {
            if rng.random_range(0.0..1.0) < 0.6 {
                oracle.insert(e);
                inserted.push(e.clone());
            }
        }
        if oracle.utility() != oracle.evaluate(&inserted) {
            exact_failures += 1;
        }

        let mut bmc = BmcOracle::new();
        let mut picked: Vec<Element> = Vec::new();
        for i in 0..40u64 {
            let items: Vec<u32> = (0..rng.random_range(1..=4usize))
                .map(|_| rng.random_range(0..30u32))
                .collect();
            let e = Element::new(i + 1, Payload::Items(Arc::new(items)), vec![0.3]).expect("valid");
            bmc.insert(&e);
            picked.push(e);
        }
        if bmc.utility() != bmc.evaluate(&picked) {
            exact_failures += 1;
        }
    }

    let passed = failures == 0 && exact_failures == 0;
    Ok((
        passed,
        format!(
            "500 log-det gains, worst relative error {worst_rel:.2e}; {exact_failures} exactness failures"
        ),
    ))
}

// ---------------------------------------------------------------------------
// Criterion 6: single-checkpoint queries match a standalone run exactly
// ---------------------------------------------------------------------------

fn criterion6() -> Result<(bool, String)> {
    let mut mismatches = 0u32;
    let mut checked = 0u32;
    for trial in 0..50u64 {
        let (d, lambda, kind) = trial_params(trial);
        let n = 30;
        let stream = trial_stream(0xA6_0000 + trial, n, d, kind);
        let spec = KnapsackSpec::new(d)?;
        // W = n: the first checkpoint never expires, so every query runs in
        // the single-governing-checkpoint regime with an empty prefix.
        let mut kw = KnapWindow::new(n, 7, lambda, spec, stream.oracle.boxed_clone())?;
        let mut ks = KnapStream::new(1, lambda, spec, stream.oracle.boxed_clone())?;
        for e in &stream.elements {
            kw.process(e)?;
            ks.process(e)?;
            let from_window = kw.query();
            let standalone = ks.solution();
            checked += 1;
            if from_window.ordinals() != standalone.ordinals() {
                mismatches += 1;
            }
        }
    }
    Ok((
        mismatches == 0,
        format!("{checked} prefix states, {mismatches} mismatches"),
    ))
}

// ---------------------------------------------------------------------------
// Criterion 7: per-instance best utility is nondecreasing in t
// ---------------------------------------------------------------------------

fn criterion7() -> Result<(bool, String)> {
    let mut regressions = 0u64;
    let mut observations = 0u64;

    for trial in 0..100u64 {
        let (d, lambda, kind) = trial_params(trial);
        let stream = trial_stream(0xA2_0000 + trial, KW_TRIAL_N, d, kind);
        let spec = KnapsackSpec::new(d)?;
        let mut kw = KnapWindow::new(KW_TRIAL_W, KW_TRIAL_L, lambda, spec, stream.oracle.boxed_clone())?;
        let mut seen: HashMap<u64, f64> = HashMap::new();
        for e in &stream.elements {
            kw.process(e)?;
            for instance in kw.instances() {
                observations += 1;
                let previous = seen.entry(instance.start()).or_insert(0.0);
                if instance.best_utility() < *previous {
                    regressions += 1;
                }
                *previous = instance.best_utility();
            }
        }
    }

    for trial in 0..100u64 {
        let (d, lambda, kind) = trial_params(trial);
        let beta = [0.05, 0.1, 0.2][(trial % 3) as usize];
        let stream = trial_stream(0xA3_0000 + trial, KW_TRIAL_N, d, kind);
        let spec = KnapsackSpec::new(d)?;
        let mut kwp = KnapWindowPlus::new(
            KW_TRIAL_W,
            lambda,
            beta,
            BufferParams::default(),
            spec,
            stream.oracle.boxed_clone(),
        )?;
        let mut seen: HashMap<u64, f64> = HashMap::new();
        for e in &stream.elements {
            kwp.process(e)?;
            for instance in kwp.instances() {
                observations += 1;
                let previous = seen.entry(instance.start()).or_insert(0.0);
                if instance.best_utility() < *previous {
                    regressions += 1;
                }
                *previous = instance.best_utility();
            }
        }
    }

    Ok((
        regressions == 0,
        format!("{observations} instance observations, {regressions} regressions"),
    ))
}

// ---------------------------------------------------------------------------
// Criteria 8 and 9: trends on one larger synthetic stream
// ---------------------------------------------------------------------------

const TREND_GEN: &str = "modular,n=100000,costs=iid(0.15,0.35)";
const TREND_SEED: u64 = 0xA8;

fn trend_config(algorithm: Algorithm, window: usize) -> Result<ExperimentConfig> {
    let gen = GenSpec::parse(TREND_GEN)?;
    let mut cfg = ExperimentConfig::new(
        algorithm,
        UtilityKind::Modular,
        window,
        StreamSource::Generated(gen),
    );
    cfg.slide = 10;
    cfg.seed = TREND_SEED;
    Ok(cfg)
}

fn criterion8() -> Result<(bool, String)> {
    let window = 10_000;
    let mut sink = std::io::sink();
    let kw = run_experiment(&trend_config(Algorithm::Kw, window)?, &mut sink)?;
    let kwp = run_experiment(&trend_config(Algorithm::KwPlus, window)?, &mut sink)?;
    let ceg = run_experiment(&trend_config(Algorithm::Ceg, window)?, &mut sink)?;

    let mean_checkpoints = kwp
        .metrics
        .iter()
        .map(|m| m.checkpoints as f64)
        .sum::<f64>()
        / kwp.metrics.len() as f64;

    let faster_than_kw = kwp.summary.mean_micros < kw.summary.mean_micros;
    let both_beat_ceg = kw.summary.mean_micros < ceg.summary.mean_micros
        && kwp.summary.mean_micros < ceg.summary.mean_micros;
    let few_checkpoints = mean_checkpoints <= 10.0;
    let sparser_index = mean_checkpoints < kw.summary.max_checkpoints as f64;
    let passed = faster_than_kw && both_beat_ceg && few_checkpoints && sparser_index;
    Ok((
        passed,
        format!(
            "mean us/slide: kwplus {:.0} < kw {:.0} < ceg {:.0}; mean checkpoints {:.2} <= 10 (kw holds {})",
            kwp.summary.mean_micros,
            kw.summary.mean_micros,
            ceg.summary.mean_micros,
            mean_checkpoints,
            kw.summary.max_checkpoints
        ),
    ))
}

fn criterion9() -> Result<(bool, String)> {
    let window = 200;
    let mut sink = std::io::sink();
    let kw = run_experiment(&trend_config(Algorithm::Kw, window)?, &mut sink)?;
    let kwp = run_experiment(&trend_config(Algorithm::KwPlus, window)?, &mut sink)?;
    let ceg = run_experiment(&trend_config(Algorithm::Ceg, window)?, &mut sink)?;

    let kw_share = kw.summary.mean_utility / ceg.summary.mean_utility;
    let kwp_share = kwp.summary.mean_utility / ceg.summary.mean_utility;
    let passed = kw_share >= 0.75 && kwp_share >= 0.75;
    Ok((
        passed,
        format!(
            "mean utility vs ceg: kw {:.1}%, kwplus {:.1}% (floor 75%)",
            kw_share * 100.0,
            kwp_share * 100.0
        ),
    ))
}
