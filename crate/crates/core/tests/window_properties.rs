//! Sliding-window behavior on randomized streams: approximation spot
//! checks at module-example scale and the storage footprint claim for the
//! pruned-index framework.

use std::collections::VecDeque;

use smdk::baselines::{brute_force_opt, ApproxBound};
use smdk::element::{Element, KnapsackSpec, Payload};
use smdk::harness::GenSpec;
use smdk::knapstream::BufferParams;
use smdk::oracle::BoxedOracle;
use smdk::utility::ModularOracle;
use smdk::{KnapWindow, KnapWindowPlus};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn modular_stream(seed: u64, n: usize) -> (Vec<Element>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut delta = 0.0f64;
    let elements = (0..n)
        .map(|i| {
            let cost = rng.random_range(0.1..=0.6);
            delta = delta.max(cost);
            Element::new(
                i as u64 + 1,
                Payload::Value(rng.random_range(0.2..2.0)),
                vec![cost],
            )
            .unwrap()
        })
        .collect();
    (elements, delta)
}

fn oracle() -> BoxedOracle {
    Box::new(ModularOracle::new())
}

#[test]
fn window_queries_meet_the_bound_on_a_small_stream() {
    // n=30, W=10, L=3, d=1: the bound holds at every step.
    let (elements, delta) = modular_stream(71, 30);
    let spec = KnapsackSpec::new(1).unwrap();
    let bound = ApproxBound::new(0.1, 0.0, 1, delta).unwrap().ks_bound;
    let mut kw = KnapWindow::new(10, 3, 0.1, spec, oracle()).unwrap();
    let mut window: VecDeque<Element> = VecDeque::new();
    for e in &elements {
        kw.process(e).unwrap();
        window.push_back(e.clone());
        if window.len() > 10 {
            window.pop_front();
        }
        let active: Vec<Element> = window.iter().cloned().collect();
        let opt = brute_force_opt(&active, &spec, &oracle()).unwrap().utility();
        assert!(kw.query().utility() + 1e-9 >= bound * opt);
    }
}

#[test]
fn pruned_index_queries_meet_the_bound_on_a_small_stream() {
    // n=40, W=12, lambda=beta=0.1.
    let (elements, delta) = modular_stream(72, 40);
    let spec = KnapsackSpec::new(1).unwrap();
    let bound = ApproxBound::new(0.1, 0.1, 1, delta).unwrap().kwp_bound;
    let mut kwp = KnapWindowPlus::new(
        12,
        0.1,
        0.1,
        BufferParams::default(),
        spec,
        oracle(),
    )
    .unwrap();
    let mut window: VecDeque<Element> = VecDeque::new();
    for e in &elements {
        kwp.process(e).unwrap();
        window.push_back(e.clone());
        if window.len() > 12 {
            window.pop_front();
        }
        let active: Vec<Element> = window.iter().cloned().collect();
        let opt = brute_force_opt(&active, &spec, &oracle()).unwrap().utility();
        assert!(kwp.query().utility() + 1e-9 >= bound * opt);
    }
}

#[test]
fn pruned_index_stores_a_small_fraction_of_the_window() {
    // A stream ten times the window: the index must hold well under a
    // quarter of W in candidates plus buffers, with no window copy at all.
    let window = 30_000usize;
    let spec = GenSpec::parse("modular,n=300000,costs=iid(0.1,0.3)").unwrap();
    let elements = spec.generate(88).unwrap();
    let mut kwp = KnapWindowPlus::new(
        window,
        0.1,
        0.1,
        BufferParams::default(),
        KnapsackSpec::new(1).unwrap(),
        oracle(),
    )
    .unwrap();
    let mut max_stored = 0usize;
    for batch in elements.chunks(30) {
        kwp.process_batch(batch).unwrap();
        max_stored = max_stored.max(kwp.stored_elements());
    }
    assert!(
        max_stored < window / 4,
        "stored {max_stored} elements, expected well below {}",
        window / 4
    );
}
