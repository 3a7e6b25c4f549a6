//! Stream ingestion, synthetic generation, cost assignment, and the
//! benchmark driver. Everything the CLI front end exposes lives here.

pub mod config;
pub mod costs;
pub mod driver;
pub mod generate;
pub mod ingest;

pub use config::{Algorithm, ExperimentConfig, StreamSource, UtilityKind};
pub use costs::{CostScheme, CostSpec, ElementAttrs};
pub use driver::{run_experiment, ExperimentOutcome, ExperimentSummary, SlideMetrics};
pub use generate::{GenSpec, PayloadFamily};
pub use ingest::{ingest_file, IngestFormat};
