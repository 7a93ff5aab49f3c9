//! Batch scenario runner behind the `wavekin` binary.

pub mod config;
pub mod diagnostics;
pub mod dump;
pub mod run;

pub use config::{parse_config, parse_config_str, Experiment, ScenarioConfig, SolverChoice};
pub use diagnostics::{write_diagnostics, DiagnosticRecord};
pub use dump::{dump_field, load_field, DumpHeader};
pub use run::{run_scenario, RunOptions, RunReport};
