//! Built-in experiments.
//!
//! Every preset runs at `N = 100` unless `paper_scale` is set, which selects
//! the full resolution (`N = 200`, `800` for the epsilon study, and up to
//! `1024` for the refinement reference). Times are the same at both scales.

use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::runner::{run_pair_cases, run_refinement, run_single, run_sweep, RunRecord, SweepKey, SweepMode};
use crate::error::{Error, Result};
use crate::initial_data::MollifierCase;

pub const DESK_N: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Plan {
    /// Independent runs of the listed cases.
    Cases(Vec<MollifierCase>),
    /// Case 0 against case 2 with the `L1` vorticity distance.
    Pair,
    Sweep { key: SweepKey, values: Vec<f64> },
    Refinement { levels: Vec<usize>, reference: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: ExperimentConfig,
    pub plan: Plan,
}

const NAMES: [&str; 14] = [
    "example1",
    "example2",
    "example3",
    "example4",
    "example5",
    "example6",
    "example7",
    "example8",
    "example9",
    "example10",
    "example11",
    "refinement-study",
    "epsilon-study",
    "compressibility",
];

pub fn list_presets() -> Vec<&'static str> {
    NAMES.to_vec()
}

fn base(name: &str, paper_n: usize, paper_scale: bool) -> ExperimentConfig {
    ExperimentConfig {
        n: if paper_scale { paper_n } else { DESK_N },
        alpha: 0.95,
        theta0_over_pi: 0.125,
        label: name.to_string(),
        ..ExperimentConfig::default()
    }
}

fn timed(mut cfg: ExperimentConfig, outputs: &[f64]) -> ExperimentConfig {
    cfg.output_times = outputs.to_vec();
    cfg.t_final = outputs.iter().copied().fold(0.0, f64::max);
    cfg
}

/// Looks up a preset by name.
pub fn preset(name: &str, paper_scale: bool) -> Result<Preset> {
    use MollifierCase::*;
    let all = MollifierCase::ALL.to_vec();
    let b = |beta: f64| ExperimentConfig {
        beta,
        ..base(name, 200, paper_scale)
    };
    let (description, config, plan) = match name {
        "example1" => ("beta = 1, single spirals in both cases", timed(b(1.0), &[1.0]), Plan::Pair),
        "example2" => ("beta = 0.5, cases differ at t = 0.5 and agree by t = 1", timed(b(0.5), &[0.5, 1.0]), Plan::Pair),
        "example3" => ("beta = 0, constant density, two spirals from case 2", timed(b(0.0), &[0.5, 1.0, 3.0]), Plan::Pair),
        "example4" => (
            "beta = 0.1, alpha = 0.1",
            timed(ExperimentConfig { alpha: 0.1, ..b(0.1) }, &[6.0]),
            Plan::Cases(all),
        ),
        "example5" => (
            "beta = 0.1, alpha = 0.5, separating peaks in cases 1 and 2",
            timed(ExperimentConfig { alpha: 0.5, ..b(0.1) }, &[1.0, 4.0]),
            Plan::Cases(all),
        ),
        "example6" => (
            "beta = 0.1, alpha = 0.75",
            timed(ExperimentConfig { alpha: 0.75, ..b(0.1) }, &[1.0, 3.0]),
            Plan::Cases(all),
        ),
        "example7" => (
            "beta = 0.1, alpha = 1.2, single spirals",
            timed(ExperimentConfig { alpha: 1.2, ..b(0.1) }, &[1.0]),
            Plan::Cases(all),
        ),
        "example8" => (
            "beta = 0.1, case 2 with large alpha",
            timed(ExperimentConfig { case: EmptyCore, ..b(0.1) }, &[1.0]),
            Plan::Sweep {
                key: SweepKey::Alpha,
                values: vec![1.3, 1.5, 1.7],
            },
        ),
        "example9" => (
            "beta = 0.1, theta0 = pi/10, distinct profiles",
            timed(ExperimentConfig { theta0_over_pi: 0.1, ..b(0.1) }, &[1.0]),
            Plan::Pair,
        ),
        "example10" => (
            "beta = 0.1, theta0 = pi/4",
            timed(ExperimentConfig { theta0_over_pi: 0.25, ..b(0.1) }, &[1.0]),
            Plan::Pair,
        ),
        "example11" => (
            "beta = 0.1, theta0 = pi/3",
            timed(ExperimentConfig { theta0_over_pi: 1.0 / 3.0, ..b(0.1) }, &[1.0]),
            Plan::Pair,
        ),
        "refinement-study" => {
            let (levels, reference) = if paper_scale { (vec![200, 400, 600], 1024) } else { (vec![25, 50, 100], 200) };
            (
                "beta = 0, case 2, density error against a finer reference",
                timed(ExperimentConfig { case: EmptyCore, ..b(0.0) }, &[0.6, 1.0]),
                Plan::Refinement { levels, reference },
            )
        }
        "epsilon-study" => (
            "beta = 0, case 2, shrinking core radius",
            timed(
                ExperimentConfig {
                    case: EmptyCore,
                    ..base(name, 800, paper_scale)
                },
                &[0.2, 0.6],
            ),
            Plan::Sweep {
                key: SweepKey::Epsilon,
                values: vec![0.006, 0.001, 0.0006],
            },
        ),
        "compressibility" => (
            "beta = 0, case 2, pressure coefficient over six decades",
            timed(ExperimentConfig { case: EmptyCore, ..b(0.0) }, &[0.25, 0.5, 1.0]),
            Plan::Sweep {
                key: SweepKey::PressureCoeff,
                values: vec![0.01, 0.1, 1.0, 10.0, 100.0, 1000.0],
            },
        ),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unknown preset `{name}`; available: {}",
                NAMES.join(", ")
            )))
        }
    };
    let name = NAMES.iter().copied().find(|n| *n == name).unwrap();
    Ok(Preset {
        name,
        description,
        config,
        plan,
    })
}

/// Result of running a preset: every run record, plus failures that did not
/// stop the preset.
#[derive(Debug, Clone)]
pub struct PresetOutcome {
    pub records: Vec<RunRecord>,
    pub failures: Vec<(String, i32)>,
}

/// Runs `p` with outputs below `out_dir`.
pub fn run_preset(p: &Preset, out_dir: &Path) -> Result<PresetOutcome> {
    let mut cfg = p.config.clone();
    cfg.out_dir = out_dir.join(p.name);
    let mut outcome = PresetOutcome {
        records: Vec::new(),
        failures: Vec::new(),
    };
    match &p.plan {
        Plan::Cases(cases) => {
            for &case in cases {
                let mut c = cfg.clone();
                c.case = case;
                c.label = format!("{}_case{}", cfg.label, case.index());
                outcome.records.push(run_single(&c)?);
            }
        }
        Plan::Pair => {
            let pair = run_pair_cases(&cfg, MollifierCase::ConstantCore, MollifierCase::EmptyCore)?;
            outcome.records.push(pair.first);
            outcome.records.push(pair.second);
        }
        Plan::Sweep { key, values } => {
            let sweep = run_sweep(&cfg, *key, values, SweepMode::Single)?;
            outcome.records = sweep.records;
            for row in sweep.rows.iter().filter(|r| r.status != 0) {
                outcome
                    .failures
                    .push((format!("{} = {}: {}", key.name(), row.value, row.message.clone().unwrap_or_default()), row.status));
            }
        }
        Plan::Refinement { levels, reference } => {
            outcome.records = run_refinement(&cfg, levels, *reference)?.records;
        }
    }
    Ok(outcome)
}
