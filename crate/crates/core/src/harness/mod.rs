//! Experiment configuration, presets, orchestration and file output.

pub mod config;
pub mod io;
pub mod presets;
pub mod runner;

pub use config::{load_config, ExperimentConfig, ProfileKind};
pub use presets::{list_presets, preset, run_preset, Plan, Preset, PresetOutcome};
pub use runner::{
    execute, run_pair, run_pair_cases, run_refinement, run_single, run_sweep, CaptureOptions, PairRecord,
    RunOutcome, RunRecord, RunStatus, SweepKey, SweepMode, SweepRecord,
};
