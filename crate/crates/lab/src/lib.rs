//! Experiment harness for VIBoost: dataset files, config-driven repeated
//! runs, CSV tables and SVG charts.

pub mod config;
pub mod error;
pub mod experiment;
pub mod loaders;
pub mod plots;
pub mod report;

pub use config::{Algorithm, DataSource, ExperimentSpec, SplitRule};
pub use error::{LabError, LabResult};
pub use experiment::{run_experiment, ResultTable, Series};
pub use plots::emit_plots;
