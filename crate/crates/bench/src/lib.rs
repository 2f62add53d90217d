//! Configuration-driven experiments on top of `mvflow-core`, with CSV / JSON / plot-data reports.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

pub use config::{ExpValue, ExperimentConfig, ExperimentKind, KERNEL_CATALOG};
pub use error::{BenchError, Result};
pub use experiments::{fit_exponent, run_experiment, PowerFit};
pub use report::{emit_report, read_plotdata, read_report_csv, read_report_json, Format, ReportRow, RunReport, Series};
