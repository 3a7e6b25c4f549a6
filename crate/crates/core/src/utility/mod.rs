//! Concrete monotone submodular utility functions.

pub mod bmc;
pub mod coverage;
pub mod ivm;
pub mod modular;

pub use bmc::BmcOracle;
pub use coverage::{CoverageOracle, WordWeightTable};
pub use ivm::IvmOracle;
pub use modular::ModularOracle;
