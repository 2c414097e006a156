//! Experiment runner: setup documents, configuration, experiments and output.

pub mod config;
pub mod doc;
pub mod experiments;
pub mod report;

pub use config::{ExperimentConfig, Format};
pub use doc::{parse_document, parse_setup, serialize_setup, ParseError, ParseErrorKind, SetupDocument};
pub use experiments::{run_experiment, Experiment, Inputs};
pub use report::{manifest_path, write_outputs, Cell, Report, Table};
