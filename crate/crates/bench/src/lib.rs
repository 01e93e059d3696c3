//! Experiment harness for DPP landmark selection: JSON-configured reconstruction,
//! robustness and classification benchmarks writing CSV result tables.

pub mod config;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod plotdata;
pub mod results;
pub mod samplers;

pub use config::{ExperimentConfig, Purpose};
pub use error::{BenchError, Result};
pub use results::{ResultRow, ResultTable};
