//! Scenario configuration, single runs, parameter sweeps and CSV output.

mod config;
mod csv;
mod sim;
mod sweep;

pub use config::ScenarioConfig;
pub use csv::{emit_csv, format_sig, write_csv};
pub use sim::{bandwidth, run, run_simulation, workload, Positions, QueryRecord, RunMetrics, Simulation, World};
pub use sweep::{aggregate, sweep, sweep_with_threads, Axis, ResultTable, Row, Summary};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("result table is empty")]
    EmptyTable,
    #[error("i/o failure: {0}")]
    IoFailure(#[from] std::io::Error),
}
