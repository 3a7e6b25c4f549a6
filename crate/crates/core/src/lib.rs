//! Streaming submodular maximization subject to d-knapsack constraints
//! (SMDK) over append-only streams and sliding windows.
//!
//! The crate provides three maintenance algorithms plus batch baselines:
//!
//! - [`KnapStream`]: single-pass SMDK over an append-only stream. Keeps a
//!   geometric grid of optimum estimates, one thresholded candidate solution
//!   per estimate, and returns the best candidate (or best singleton) seen.
//! - [`KnapWindow`]: sliding-window SMDK via equal-interval checkpoints.
//!   Each checkpoint owns a [`KnapStream`] over the stream suffix starting
//!   there; queries post-process the leading window prefix on a clone.
//! - [`KnapWindowPlus`]: sliding-window SMDK with a utility-pruned checkpoint
//!   index, per-candidate near-miss buffers, and cost-effectiveness greedy
//!   post-processing. Stores far fewer elements than the window itself.
//! - [`baselines`]: the CostEffectGreedy batch baseline and an exact
//!   brute-force optimum for small windows, used as a test oracle.
//!
//! Utility functions are pluggable through the [`UtilityOracle`] trait;
//! weighted word coverage, an informative-vector-machine log-determinant
//! utility, budgeted maximum coverage, and a modular utility ship in
//! [`utility`]. The [`harness`] module holds stream ingestion, synthetic
//! generation, cost-assignment schemes, and the benchmark driver behind the
//! CLI.

pub mod acceptance;
pub mod baselines;
pub mod element;
pub mod error;
pub mod harness;
pub mod knapstream;
pub mod knapwindow;
pub mod knapwindowplus;
pub mod oracle;
pub mod utility;

pub use element::{
    check_feasibility, cost_effectiveness, Element, KnapsackSpec, Payload, SolutionSet,
};
pub use error::{Error, Result};
pub use knapstream::KnapStream;
pub use knapwindow::KnapWindow;
pub use knapwindowplus::KnapWindowPlus;
pub use oracle::{BoxedOracle, UtilityOracle};
