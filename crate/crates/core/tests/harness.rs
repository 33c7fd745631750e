use std::path::Path;

use wedge_euler::harness::io::read_numeric_csv;
use wedge_euler::harness::runner::{read_manifest, verify_manifest};
use wedge_euler::harness::{
    load_config, run_pair_cases, run_refinement, run_single, run_sweep, ExperimentConfig, RunStatus, SweepKey,
    SweepMode,
};
use wedge_euler::initial_data::{build_initial_state, MollifierCase};
use wedge_euler::diagnostics::field_vorticity;
use wedge_euler::Error;

fn small(dir: &Path, label: &str) -> ExperimentConfig {
    ExperimentConfig {
        n: 20,
        epsilon: 0.03,
        t_final: 0.01,
        output_times: vec![0.0, 0.005, 0.01],
        metric_samples: 4,
        out_dir: dir.to_path_buf(),
        label: label.into(),
        ..ExperimentConfig::default()
    }
}

#[test]
fn manifest_lists_every_file_with_its_shape() {
    let dir = tempfile::tempdir().unwrap();
    let rec = run_single(&small(dir.path(), "m")).unwrap();
    assert_eq!(rec.status, RunStatus::Completed);
    assert_eq!(rec.snapshots.len(), 3);
    verify_manifest(&rec).unwrap();
    let back = read_manifest(&rec.manifest).unwrap();
    assert_eq!(back, rec);
    let cfg = load_config(rec.config_file.as_ref().unwrap()).unwrap();
    assert_eq!(cfg, rec.config);
    let audit = rec.audit.unwrap();
    assert!(audit.max_relative_drift.iter().all(|&d| d <= 1e-11), "{audit:?}");
    assert!(rec.min_stage_corner_density >= 1e-13);
    assert_eq!(rec.final_time, 0.01);
    let meta = rec.metadata.unwrap();
    assert_eq!(meta.cfl, 0.1);
    assert!(meta.poisson_relative_residual <= 1e-10);
}

#[test]
fn reruns_are_bit_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_single(&small(a.path(), "d")).unwrap();
    let rb = run_single(&small(b.path(), "d")).unwrap();
    for (fa, fb) in ra.files().iter().zip(rb.files()) {
        assert_eq!(std::fs::read(&fa.path).unwrap(), std::fs::read(&fb.path).unwrap());
    }
}

#[test]
fn zero_time_snapshot_is_the_initial_vorticity() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path(), "t0");
    cfg.t_final = 0.0;
    cfg.output_times.clear();
    let rec = run_single(&cfg).unwrap();
    assert_eq!(rec.steps, 0);
    let init = build_initial_state(&cfg.grid().unwrap(), &cfg.vorticity(), &cfg.fluid(), cfg.rho_floor_init, cfg.poisson_tol).unwrap();
    let w = field_vorticity(&init.field, cfg.rho_floor_limiter);
    let table = read_numeric_csv(&rec.snapshots[0].vorticity.path).unwrap();
    assert_eq!(table.rows.len(), w.values().len());
    for (row, v) in table.rows.iter().zip(w.values()) {
        assert_eq!(row[2], *v);
    }
}

#[test]
fn identical_cases_have_zero_distance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), "same");
    let p = run_pair_cases(&cfg, MollifierCase::ConstantCore, MollifierCase::ConstantCore).unwrap();
    assert_eq!(p.series.times, vec![0.0, 0.0025, 0.005, 0.0075, 0.01]);
    assert!(p.series.values.iter().all(|&d| d == 0.0));
    let csv = read_numeric_csv(&p.series_file.path).unwrap();
    assert_eq!(csv.rows.len(), 5);

    let q = run_pair_cases(&cfg, MollifierCase::ConstantCore, MollifierCase::EmptyCore).unwrap();
    assert!(q.series.values.iter().all(|&d| d > 0.0));
}

#[test]
fn sweeps_record_failures_and_continue() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), "sw");
    let empty = run_sweep(&cfg, SweepKey::Beta, &[], SweepMode::Single).unwrap();
    assert!(empty.rows.is_empty() && empty.summary.is_none());

    let s = run_sweep(&cfg, SweepKey::Beta, &[0.0, 1.0], SweepMode::Single).unwrap();
    assert_eq!(s.rows.len(), 2);
    let table = read_numeric_csv(&s.summary.as_ref().unwrap().path).unwrap();
    assert_eq!(table.header[0], "value");
    assert_eq!(table.rows.len(), 2);
    assert!(s.rows.iter().all(|r| r.status == 0));

    assert!(matches!(
        run_sweep(&cfg, SweepKey::Beta, &[-1.0], SweepMode::Single),
        Err(Error::Config { .. })
    ));

    let p = run_sweep(&cfg, SweepKey::Theta0, &[0.25], SweepMode::Pair).unwrap();
    assert_eq!(p.rows.len(), 2);
    assert!(p.rows.iter().all(|r| r.final_distance.is_some()));
}

#[test]
fn numerical_failure_is_written_to_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path(), "bad");
    // With the limiter floor above the initial densities the first stage fails.
    cfg.beta = 1.0;
    cfg.rho_floor_limiter = 0.5;
    let err = run_single(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let rec = read_manifest(&dir.path().join("bad_manifest.json")).unwrap();
    assert!(matches!(rec.status, RunStatus::Failed { exit_code: 2, .. }));
}

#[test]
fn refinement_table_has_one_row_per_level_and_time() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path(), "ref");
    cfg.output_times = vec![0.005, 0.01];
    let r = run_refinement(&cfg, &[10, 20], 40).unwrap();
    assert_eq!(r.rows.len(), 4);
    assert!(r.rows.iter().all(|row| row.l2_density_error.is_finite()));
    assert!(run_refinement(&cfg, &[40], 40).is_err());
}
