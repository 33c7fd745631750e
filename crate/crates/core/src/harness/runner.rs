//! Run orchestration: single runs, case pairs, parameter sweeps and
//! mesh-refinement studies.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::io::{self, FileRecord};
use crate::diagnostics::{
    center_density, conserved_magnitudes, conserved_totals, count_peaks, field_vorticity, l1_distance,
    l2_density_error, CenterField, MetricSeries, Peak, PeakSettings,
};
use crate::error::{Error, Result};
use crate::initial_data::{build_from_profile, MollifierCase};
use crate::solver::{run, DGField, RunHooks, TimeController};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RunStatus {
    Completed,
    Failed { message: String, exit_code: i32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub vorticity: FileRecord,
    pub density: FileRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSample {
    pub time: f64,
    pub count: usize,
    pub window_max: f64,
    pub peaks: Vec<Peak>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationAudit {
    pub initial: [f64; 3],
    pub last: [f64; 3],
    /// `sum |c0| dx dy` at `t = 0`, the scale for relative drift.
    pub magnitude: [f64; 3],
    /// Largest drift seen after any stage, relative to `magnitude`.
    pub max_relative_drift: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub setup_seconds: f64,
    pub solve_seconds: f64,
}

/// Numerical choices that affect results, recorded with every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMetadata {
    pub basis: String,
    pub volume_quadrature: String,
    pub edge_quadrature: String,
    pub flux: String,
    pub limiter: String,
    pub time_integrator: String,
    pub reconstruction: String,
    pub cfl: f64,
    pub rho_floor_init: f64,
    pub rho_floor_limiter: f64,
    pub poisson_tol: f64,
    pub poisson_iterations: usize,
    pub poisson_relative_residual: f64,
    pub peak_settings: PeakSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub config: ExperimentConfig,
    pub config_text: String,
    pub status: RunStatus,
    pub warnings: Vec<String>,
    pub snapshots: Vec<Snapshot>,
    pub peaks: Vec<PeakSample>,
    pub audit: Option<ConservationAudit>,
    /// Smallest corner density after any limited stage.
    pub min_stage_corner_density: f64,
    pub steps: usize,
    pub final_time: f64,
    pub timings: Timings,
    pub metadata: Option<SolverMetadata>,
    pub config_file: Option<PathBuf>,
    pub manifest: PathBuf,
}

impl RunRecord {
    pub fn is_completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    /// Peak count at the last snapshot.
    pub fn final_peak_count(&self) -> Option<usize> {
        self.peaks.last().map(|p| p.count)
    }

    /// Every file referenced by this record.
    pub fn files(&self) -> Vec<&FileRecord> {
        self.snapshots
            .iter()
            .flat_map(|s| [&s.vorticity, &s.density])
            .collect()
    }
}

/// What to keep in memory besides the files on disk.
#[derive(Debug, Clone, Default)]
pub struct CaptureOptions {
    /// Times at which the cell-center vorticity is retained.
    pub sample_times: Vec<f64>,
    /// Retain full DG fields at snapshot times.
    pub keep_fields: bool,
}

/// A finished run with its in-memory captures.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub samples: Vec<(f64, CenterField)>,
    pub fields: Vec<(f64, DGField)>,
}

struct Recorder<'a> {
    cfg: &'a ExperimentConfig,
    snapshot_times: Vec<f64>,
    capture: &'a CaptureOptions,
    snapshots: Vec<Snapshot>,
    peaks: Vec<PeakSample>,
    samples: Vec<(f64, CenterField)>,
    fields: Vec<(f64, DGField)>,
    initial: [f64; 3],
    magnitude: [f64; 3],
    last: [f64; 3],
    max_drift: [f64; 3],
    min_corner: f64,
}

impl Recorder<'_> {
    fn audit(&mut self, field: &DGField) {
        let totals = conserved_totals(field);
        for (q, total) in totals.iter().enumerate() {
            let scale = if self.magnitude[q] > 0.0 { self.magnitude[q] } else { 1.0 };
            self.max_drift[q] = self.max_drift[q].max((total - self.initial[q]).abs() / scale);
        }
        self.last = totals;
    }
}

impl RunHooks for Recorder<'_> {
    fn on_output(&mut self, t: f64, field: &DGField) -> Result<()> {
        let omega = field_vorticity(field, self.cfg.rho_floor_limiter);
        if self.snapshot_times.contains(&t) {
            let dir = &self.cfg.out_dir;
            let label = &self.cfg.label;
            let vpath = dir.join(io::snapshot_name(label, "vorticity", t));
            let (rows, columns) = io::write_center_csv(&vpath, &omega)?;
            let vorticity = FileRecord { path: vpath, rows, columns };
            let dpath = dir.join(io::snapshot_name(label, "density", t));
            let (rows, columns) = io::write_center_csv(&dpath, &center_density(field))?;
            let density = FileRecord { path: dpath, rows, columns };
            self.snapshots.push(Snapshot { time: t, vorticity, density });
            let report = count_peaks(&omega, &self.cfg.peaks());
            log::info!("{}: t = {t}, {} vorticity peak(s)", self.cfg.label, report.count);
            self.peaks.push(PeakSample {
                time: t,
                count: report.count,
                window_max: report.window_max,
                peaks: report.peaks,
            });
            if self.capture.keep_fields {
                self.fields.push((t, field.clone()));
            }
        }
        if self.capture.sample_times.contains(&t) {
            self.samples.push((t, omega));
        }
        self.audit(field);
        Ok(())
    }

    fn on_stage(&mut self, field: &DGField) {
        self.min_corner = self.min_corner.min(field.min_corner_density());
        self.audit(field);
    }
}

fn metadata(cfg: &ExperimentConfig, iterations: usize, residual: f64) -> SolverMetadata {
    SolverMetadata {
        basis: "P1 {1, xi, eta} on [-1,1]^2".into(),
        volume_quadrature: "2x2 tensor Gauss".into(),
        edge_quadrature: "2-point Gauss per edge".into(),
        flux: "Lax-Friedrichs, global wave speed per stage".into(),
        limiter: "density slope scaling to the floor at cell corners, after every stage".into(),
        time_integrator: "SSP-RK3 (Shu-Osher)".into(),
        reconstruction: "P1 interpolation through SW, SE, NW corner values".into(),
        cfl: cfg.cfl,
        rho_floor_init: cfg.rho_floor_init,
        rho_floor_limiter: cfg.rho_floor_limiter,
        poisson_tol: cfg.poisson_tol,
        poisson_iterations: iterations,
        poisson_relative_residual: residual,
        peak_settings: cfg.peaks(),
    }
}

fn manifest_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir.join(format!("{}_manifest.json", cfg.label))
}

/// Runs one configuration, writing snapshots, a config copy and a manifest.
///
/// Numerical failures are recorded in the manifest before the error is returned.
pub fn execute(cfg: &ExperimentConfig, capture: &CaptureOptions) -> Result<RunOutcome> {
    cfg.validate()?;
    io::ensure_dir(&cfg.out_dir)?;
    let warnings = cfg.warnings();
    for w in &warnings {
        log::warn!("{}: {w}", cfg.label);
    }
    let config_file = cfg.out_dir.join(format!("{}.cfg", cfg.label));
    std::fs::write(&config_file, cfg.to_text()).map_err(|e| Error::io(&config_file, e))?;

    let mut record = RunRecord {
        label: cfg.label.clone(),
        config: cfg.clone(),
        config_text: cfg.to_text(),
        status: RunStatus::Completed,
        warnings,
        snapshots: Vec::new(),
        peaks: Vec::new(),
        audit: None,
        min_stage_corner_density: f64::INFINITY,
        steps: 0,
        final_time: 0.0,
        timings: Timings {
            setup_seconds: 0.0,
            solve_seconds: 0.0,
        },
        metadata: None,
        config_file: Some(config_file),
        manifest: manifest_path(cfg),
    };

    let result = simulate(cfg, capture, &mut record);
    match result {
        Ok((samples, fields)) => {
            io::write_json(&record.manifest, &record)?;
            Ok(RunOutcome { record, samples, fields })
        }
        Err(e) => {
            record.status = RunStatus::Failed {
                message: e.to_string(),
                exit_code: e.exit_code(),
            };
            io::write_json(&record.manifest, &record)?;
            Err(e)
        }
    }
}

type Captured = (Vec<(f64, CenterField)>, Vec<(f64, DGField)>);

fn simulate(cfg: &ExperimentConfig, capture: &CaptureOptions, record: &mut RunRecord) -> Result<Captured> {
    let grid = cfg.grid()?;
    let start = Instant::now();
    let init = build_from_profile(&grid, &cfg.profile(), &cfg.fluid(), cfg.rho_floor_init, cfg.poisson_tol)?;
    record.metadata = Some(metadata(cfg, init.poisson.iterations, init.poisson.relative_residual));
    record.timings.setup_seconds = start.elapsed().as_secs_f64();

    let initial = conserved_totals(&init.field);
    let mut recorder = Recorder {
        cfg,
        snapshot_times: cfg.snapshot_times(),
        capture,
        snapshots: Vec::new(),
        peaks: Vec::new(),
        samples: Vec::new(),
        fields: Vec::new(),
        initial,
        magnitude: conserved_magnitudes(&init.field),
        last: initial,
        max_drift: [0.0; 3],
        min_corner: init.field.min_corner_density(),
    };
    let mut stops = cfg.snapshot_times();
    stops.extend(capture.sample_times.iter().copied());

    let mut tc = TimeController::new(cfg.cfl, cfg.t_final)?;
    let solve_start = Instant::now();
    let result = run(init.field, &mut tc, cfg.solver(), &stops, &mut recorder);
    record.timings.solve_seconds = solve_start.elapsed().as_secs_f64();
    record.steps = tc.steps;
    record.final_time = tc.t;
    record.snapshots = std::mem::take(&mut recorder.snapshots);
    record.peaks = std::mem::take(&mut recorder.peaks);
    record.min_stage_corner_density = recorder.min_corner;
    record.audit = Some(ConservationAudit {
        initial: recorder.initial,
        last: recorder.last,
        magnitude: recorder.magnitude,
        max_relative_drift: recorder.max_drift,
    });
    result?;
    Ok((recorder.samples, recorder.fields))
}

/// Runs one configuration and returns its record.
pub fn run_single(cfg: &ExperimentConfig) -> Result<RunRecord> {
    execute(cfg, &CaptureOptions::default()).map(|o| o.record)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub label: String,
    pub cases: [u8; 2],
    pub series: MetricSeries,
    pub series_file: FileRecord,
    pub first: RunRecord,
    pub second: RunRecord,
}

fn with_case(cfg: &ExperimentConfig, case: MollifierCase, label: String) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.case = case;
    c.label = label;
    c
}

/// Runs two cases with otherwise identical settings and samples the `L1`
/// distance between their vorticities.
pub fn run_pair_cases(cfg: &ExperimentConfig, a: MollifierCase, b: MollifierCase) -> Result<PairRecord> {
    cfg.validate()?;
    let capture = CaptureOptions {
        sample_times: cfg.sample_times(),
        keep_fields: false,
    };
    let label_a = format!("{}_case{}", cfg.label, a.index());
    let mut label_b = format!("{}_case{}", cfg.label, b.index());
    if a == b {
        label_b.push_str("_repeat");
    }
    let first = execute(&with_case(cfg, a, label_a), &capture)?;
    let second = execute(&with_case(cfg, b, label_b), &capture)?;

    let name = format!("D_case{}_case{}", a.index(), b.index());
    let mut series = MetricSeries::new(name);
    for ((ta, wa), (tb, wb)) in first.samples.iter().zip(&second.samples) {
        debug_assert_eq!(ta, tb);
        series.push(*ta, l1_distance(wa, wb)?)?;
    }
    let path = cfg.out_dir.join(format!("{}_distance.csv", cfg.label));
    let (rows, columns) = io::write_series_csv(&path, &series)?;
    let record = PairRecord {
        label: cfg.label.clone(),
        cases: [a.index(), b.index()],
        series,
        series_file: FileRecord { path, rows, columns },
        first: first.record,
        second: second.record,
    };
    io::write_json(&cfg.out_dir.join(format!("{}_pair.json", cfg.label)), &record)?;
    Ok(record)
}

/// Case 0 against case 2.
pub fn run_pair(cfg: &ExperimentConfig) -> Result<MetricSeries> {
    run_pair_cases(cfg, MollifierCase::ConstantCore, MollifierCase::EmptyCore).map(|p| p.series)
}

/// Parameters a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepKey {
    Beta,
    Alpha,
    /// Given as a multiple of pi.
    Theta0,
    PressureCoeff,
    N,
    Epsilon,
}

impl SweepKey {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "beta" => SweepKey::Beta,
            "alpha" => SweepKey::Alpha,
            "theta0" | "theta0_over_pi" => SweepKey::Theta0,
            "A" => SweepKey::PressureCoeff,
            "N" => SweepKey::N,
            "epsilon" => SweepKey::Epsilon,
            _ => {
                return Err(Error::config(
                    "key",
                    format!("cannot sweep `{s}`; expected beta, alpha, theta0, A, N or epsilon"),
                ))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepKey::Beta => "beta",
            SweepKey::Alpha => "alpha",
            SweepKey::Theta0 => "theta0",
            SweepKey::PressureCoeff => "A",
            SweepKey::N => "N",
            SweepKey::Epsilon => "epsilon",
        }
    }

    fn config_key(self) -> &'static str {
        match self {
            SweepKey::Theta0 => "theta0_over_pi",
            other => other.name(),
        }
    }

    /// Copy of `base` with this key set to `value`, validated.
    pub fn apply(self, base: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let mut cfg = base.clone();
        if self == SweepKey::N && (value.fract() != 0.0 || value < 0.0) {
            return Err(Error::config("N", format!("sweep value {value} is not a cell count")));
        }
        let text = if self == SweepKey::N { format!("{}", value as usize) } else { value.to_string() };
        cfg.set(self.config_key(), &text)
            .map_err(|reason| Error::config(self.config_key(), reason))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepMode {
    Single,
    Pair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub case: u8,
    /// 0 on success, otherwise the failure's exit code.
    pub status: i32,
    pub final_peak_count: Option<usize>,
    pub final_distance: Option<f64>,
    pub max_mass_drift: Option<f64>,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub key: SweepKey,
    pub rows: Vec<SweepRow>,
    pub records: Vec<RunRecord>,
    pub summary: Option<FileRecord>,
}

fn row_from(value: f64, rec: &RunRecord, distance: Option<f64>) -> SweepRow {
    SweepRow {
        value,
        case: rec.config.case.index(),
        status: 0,
        final_peak_count: rec.final_peak_count(),
        final_distance: distance,
        max_mass_drift: rec.audit.as_ref().map(|a| a.max_relative_drift[0]),
        message: None,
    }
}

fn failed_row(value: f64, case: MollifierCase, e: &Error) -> SweepRow {
    SweepRow {
        value,
        case: case.index(),
        status: e.exit_code(),
        final_peak_count: None,
        final_distance: None,
        max_mass_drift: None,
        message: Some(e.to_string()),
    }
}

fn value_tag(v: f64) -> String {
    v.to_string()
}

/// One run (or case pair) per value; failures are recorded and the sweep continues.
pub fn run_sweep(base: &ExperimentConfig, key: SweepKey, values: &[f64], mode: SweepMode) -> Result<SweepRecord> {
    base.validate()?;
    let configs: Vec<ExperimentConfig> = values
        .iter()
        .map(|&v| {
            let mut cfg = key.apply(base, v)?;
            let tag = format!("{}_{}{}", base.label, key.name(), value_tag(v));
            cfg.out_dir = base.out_dir.join(&tag);
            cfg.label = tag;
            Ok(cfg)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut records = Vec::new();
    for (cfg, &value) in configs.iter().zip(values) {
        match mode {
            SweepMode::Single => match run_single(cfg) {
                Ok(rec) => {
                    rows.push(row_from(value, &rec, None));
                    records.push(rec);
                }
                Err(e) => {
                    log::error!("{}: {e}", cfg.label);
                    rows.push(failed_row(value, cfg.case, &e));
                }
            },
            SweepMode::Pair => match run_pair_cases(cfg, MollifierCase::ConstantCore, MollifierCase::EmptyCore) {
                Ok(p) => {
                    let d = p.series.values.last().copied();
                    rows.push(row_from(value, &p.first, d));
                    rows.push(row_from(value, &p.second, d));
                    records.push(p.first);
                    records.push(p.second);
                }
                Err(e) => {
                    log::error!("{}: {e}", cfg.label);
                    rows.push(failed_row(value, MollifierCase::ConstantCore, &e));
                    rows.push(failed_row(value, MollifierCase::EmptyCore, &e));
                }
            },
        }
    }

    let summary = if values.is_empty() {
        None
    } else {
        io::ensure_dir(&base.out_dir)?;
        let path = base.out_dir.join(format!("{}_sweep_{}.csv", base.label, key.name()));
        let opt = |v: Option<f64>| v.map_or_else(|| "NaN".to_string(), |x| format!("{x:.16e}"));
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    value_tag(r.value),
                    r.case.to_string(),
                    r.status.to_string(),
                    opt(r.final_peak_count.map(|c| c as f64)),
                    opt(r.final_distance),
                    opt(r.max_mass_drift),
                ]
            })
            .collect();
        let header = ["value", "case", "status", "final_peak_count", "final_distance", "max_mass_drift"];
        let (r, c) = io::write_table_csv(&path, &header, &table)?;
        Some(FileRecord { path, rows: r, columns: c })
    };
    let record = SweepRecord { key, rows, records, summary };
    if !values.is_empty() {
        io::write_json(&base.out_dir.join(format!("{}_sweep_{}.json", base.label, key.name())), &record)?;
    }
    Ok(record)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub n: usize,
    pub time: f64,
    pub l2_density_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementRecord {
    pub reference_n: usize,
    pub rows: Vec<RefinementRow>,
    pub table: FileRecord,
    pub records: Vec<RunRecord>,
}

/// Runs each level and a finer reference, then compares densities at every snapshot time.
pub fn run_refinement(cfg: &ExperimentConfig, levels: &[usize], reference_n: usize) -> Result<RefinementRecord> {
    cfg.validate()?;
    if let Some(&bad) = levels.iter().find(|&&n| n >= reference_n) {
        return Err(Error::config("N", format!("level {bad} is not coarser than the reference {reference_n}")));
    }
    let capture = CaptureOptions {
        sample_times: Vec::new(),
        keep_fields: true,
    };
    let level_cfg = |n: usize| -> Result<ExperimentConfig> {
        let mut c = SweepKey::N.apply(cfg, n as f64)?;
        c.label = format!("{}_N{n}", cfg.label);
        c.out_dir = cfg.out_dir.join(&c.label);
        Ok(c)
    };
    let reference = execute(&level_cfg(reference_n)?, &capture)?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &n in levels {
        let coarse = execute(&level_cfg(n)?, &capture)?;
        for ((t, f), (tr, fr)) in coarse.fields.iter().zip(&reference.fields) {
            debug_assert_eq!(t, tr);
            rows.push(RefinementRow {
                n,
                time: *t,
                l2_density_error: l2_density_error(f, fr)?,
            });
        }
        records.push(coarse.record);
    }
    records.push(reference.record);
    let path = cfg.out_dir.join(format!("{}_refinement.csv", cfg.label));
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.n.to_string(), r.time.to_string(), format!("{:.16e}", r.l2_density_error)])
        .collect();
    let (r, c) = io::write_table_csv(&path, &["N", "t", "l2_density_error"], &table)?;
    let record = RefinementRecord {
        reference_n,
        rows,
        table: FileRecord { path, rows: r, columns: c },
        records,
    };
    io::write_json(&cfg.out_dir.join(format!("{}_refinement.json", cfg.label)), &record)?;
    Ok(record)
}

/// Checks that every file in a manifest exists with its declared shape.
pub fn verify_manifest(record: &RunRecord) -> Result<()> {
    for f in record.files() {
        check_file(f)?;
    }
    Ok(())
}

pub fn check_file(f: &FileRecord) -> Result<()> {
    let t = io::read_numeric_csv(&f.path)?;
    if t.rows.len() != f.rows || t.header.len() != f.columns {
        return Err(Error::Parse {
            path: f.path.display().to_string(),
            line: 1,
            reason: format!(
                "declared {}x{}, found {}x{}",
                f.rows,
                f.columns,
                t.rows.len(),
                t.header.len()
            ),
        });
    }
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<RunRecord> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}
