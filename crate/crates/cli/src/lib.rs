//! Experiment harness around `uplink-core`: config files, sweeps over
//! device count or offered rate, and CSV reports.

pub mod config;
pub mod report;
pub mod sweep;

pub use config::{load_config, parse_config, ConfigError, Engine, ExperimentConfig, SweepAxis};
pub use report::{emit_report, read_rows, write_rows, RESULT_HEADER};
pub use sweep::{compare, run_sweep, ComparisonRow, EngineTag, ResultRow, SweepOutput};
