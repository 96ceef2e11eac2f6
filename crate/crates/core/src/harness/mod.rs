//! Experiment drivers: configs, presets, convergence and phase-transition
//! runs, and the command-line front end.

mod cli;
mod config;
mod convergence;
mod phase;
mod presets;

pub use cli::{run_cli, EXIT_DEGENERATE, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
pub use config::{ExperimentConfig, ExperimentKind, Sweep};
pub use convergence::{comparison_table, run_convergence, ConvergenceOutput, RunSummary};
pub use phase::{
    batch_size, grid_csv, run_phase, run_trial, summarize, trial_seed, PhaseCell, PhaseOutput, TrialOutcome,
    GRID_HEADER, GRID_SCHEMA,
};
pub use presets::{fig2, phase as phase_preset, preset, scaled, DICT_STOP, PRESETS};
