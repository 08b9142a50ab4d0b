//! Config-driven experiments: load data, build the problem, run an
//! algorithm, write CSV traces; sweeps over parameter overrides.

mod config;
mod run;
mod sweep;

pub use config::{
    AlgorithmConfig, AlgorithmSpec, DataSource, ExperimentConfig, Overrides, ProblemConfig, ProblemSpec,
    ResolvedExperiment,
};
pub use run::{execute, load_data, run_experiment, trace_row, version_string, write_trace, RunOutput, TRACE_COLUMNS};
pub use sweep::{run_sweep, RunReport, SweepConfig, SweepReport};
