//! Experiment orchestration: configuration, figure presets, the seeded
//! replication runner, result emission, and the built-in invariant suite.

pub mod config;
pub mod output;
pub mod preset;
pub mod runner;
pub mod seed;
pub mod selfcheck;

pub use config::{ExperimentConfig, OutputFormat, PolicyName};
pub use output::{emit_results, render_csv, render_json, CSV_HEADER};
pub use preset::{default_betas, default_gammas, preset, PRESET_NAMES};
pub use runner::{
    cell_replication_seed, run_experiment, run_experiment_detailed,
    run_experiment_detailed_sequential, run_experiment_sequential, run_single, CellResult,
    ResultRow, RunSetup, SingleRun,
};
pub use seed::{replication_seed, CellKey};
pub use selfcheck::run_selfcheck;
