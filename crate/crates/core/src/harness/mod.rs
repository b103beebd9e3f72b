//! Seeded experiment orchestration: configurations, single runs, suites of
//! repetitions and CSV output.
//!
//! Seeds `seed..seed + repetitions` are run for every policy. Within a seed
//! all policies see the same instance and the same noise sequence.

mod aggregate;
mod config;
mod run;
mod suite;

pub use aggregate::{
    aggregate_traces, emit_csv, mean_se2, parse_csv, read_csv, write_csv, AggregateResult, PolicyCurve,
};
pub use config::{BetaConfig, EnvironmentConfig, ExperimentConfig, KernelConfig, ObjectiveConfig, PolicyConfig};
pub use run::{
    build_environment, run_single, run_single_with, RegretTrace, RunDiagnostics, RunOptions, RunOutput, GPUCB_BETA,
};
pub use suite::{run_suite, run_suite_with, SuiteOptions, SuiteReport};
