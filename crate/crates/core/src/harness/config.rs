//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Lists are comma separated. Angles are given as multiples of pi
//! (`theta0_over_pi = 0.125` is pi/8). Unknown keys are rejected and
//! missing keys take the defaults below.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::PeakSettings;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::initial_data::{MollifierCase, VorticityParams, VorticityProfile};
use crate::solver::{FluidParams, SolverSettings, TimeController};

/// Shape of the initial vorticity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    /// Mollified singular wedges.
    Wedge,
    /// Smooth two-lobe stand-in used for convergence studies.
    Smooth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub a: f64,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub theta0_over_pi: f64,
    pub epsilon: f64,
    pub case: MollifierCase,
    pub pressure_coeff: f64,
    pub gamma: f64,
    pub cfl: f64,
    pub t_final: f64,
    /// Snapshot times; empty means the final time only.
    pub output_times: Vec<f64>,
    /// Sample times for pair metrics; empty means `metric_samples` uniform samples.
    pub metric_times: Vec<f64>,
    pub metric_samples: usize,
    pub rho_floor_init: f64,
    pub rho_floor_limiter: f64,
    pub poisson_tol: f64,
    pub peak_threshold: f64,
    pub peak_window: f64,
    pub peak_min_size: usize,
    pub profile: ProfileKind,
    pub bump_amplitude: f64,
    pub bump_width: f64,
    pub out_dir: PathBuf,
    pub label: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            a: 0.2,
            n: 200,
            alpha: 0.95,
            beta: 0.0,
            theta0_over_pi: 0.125,
            epsilon: 0.004,
            case: MollifierCase::ConstantCore,
            pressure_coeff: 1.0,
            gamma: 1.4,
            cfl: 0.1,
            t_final: 1.0,
            output_times: Vec::new(),
            metric_times: Vec::new(),
            metric_samples: 20,
            rho_floor_init: 1e-10,
            rho_floor_limiter: 1e-13,
            poisson_tol: 1e-10,
            peak_threshold: 0.3,
            peak_window: 0.05,
            peak_min_size: 2,
            profile: ProfileKind::Wedge,
            bump_amplitude: 100.0,
            bump_width: 0.04,
            out_dir: PathBuf::from("out"),
            label: "run".to_string(),
        }
    }
}

/// Every recognised key, in serialization order.
pub const KEYS: &[&str] = &[
    "label",
    "out_dir",
    "a",
    "N",
    "alpha",
    "beta",
    "theta0_over_pi",
    "epsilon",
    "case",
    "A",
    "gamma",
    "cfl",
    "T",
    "output_times",
    "metric_times",
    "metric_samples",
    "rho_floor_init",
    "rho_floor_limiter",
    "poisson_tol",
    "peak_threshold",
    "peak_window",
    "peak_min_size",
    "profile",
    "bump_amplitude",
    "bump_width",
];

fn parse_f64(key: &str, v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>()
        .map_err(|_| format!("`{key}` expects a number, got `{v}`"))
}

fn parse_usize(key: &str, v: &str) -> std::result::Result<usize, String> {
    v.parse::<usize>()
        .map_err(|_| format!("`{key}` expects a non-negative integer, got `{v}`"))
}

fn parse_list(key: &str, v: &str) -> std::result::Result<Vec<f64>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_f64(key, s.trim())).collect()
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

impl ExperimentConfig {
    /// Assigns one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        match key {
            "label" => {
                if v.is_empty() || v.contains(['/', '\\']) {
                    return Err(format!("`label` must be a non-empty file-name fragment, got `{v}`"));
                }
                self.label = v.to_string();
            }
            "out_dir" => self.out_dir = PathBuf::from(v),
            "a" => self.a = parse_f64(key, v)?,
            "N" => self.n = parse_usize(key, v)?,
            "alpha" => self.alpha = parse_f64(key, v)?,
            "beta" => self.beta = parse_f64(key, v)?,
            "theta0_over_pi" => self.theta0_over_pi = parse_f64(key, v)?,
            "epsilon" => self.epsilon = parse_f64(key, v)?,
            "case" => {
                let k = v
                    .parse::<u8>()
                    .ok()
                    .and_then(MollifierCase::from_index)
                    .ok_or_else(|| format!("`case` must be 0, 1 or 2, got `{v}`"))?;
                self.case = k;
            }
            "A" => self.pressure_coeff = parse_f64(key, v)?,
            "gamma" => self.gamma = parse_f64(key, v)?,
            "cfl" => self.cfl = parse_f64(key, v)?,
            "T" => self.t_final = parse_f64(key, v)?,
            "output_times" => self.output_times = parse_list(key, v)?,
            "metric_times" => self.metric_times = parse_list(key, v)?,
            "metric_samples" => self.metric_samples = parse_usize(key, v)?,
            "rho_floor_init" => self.rho_floor_init = parse_f64(key, v)?,
            "rho_floor_limiter" => self.rho_floor_limiter = parse_f64(key, v)?,
            "poisson_tol" => self.poisson_tol = parse_f64(key, v)?,
            "peak_threshold" => self.peak_threshold = parse_f64(key, v)?,
            "peak_window" => self.peak_window = parse_f64(key, v)?,
            "peak_min_size" => self.peak_min_size = parse_usize(key, v)?,
            "profile" => {
                self.profile = match v {
                    "wedge" => ProfileKind::Wedge,
                    "smooth" => ProfileKind::Smooth,
                    _ => return Err(format!("`profile` must be `wedge` or `smooth`, got `{v}`")),
                }
            }
            "bump_amplitude" => self.bump_amplitude = parse_f64(key, v)?,
            "bump_width" => self.bump_width = parse_f64(key, v)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Parses and validates configuration text; `source` names it in errors.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |reason: String| Error::Parse {
                path: source.to_string(),
                line: k + 1,
                reason,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected `key = value`, got `{line}`")))?;
            cfg.set(key.trim(), value).map_err(parse_err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes to the text format; `parse(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let case = self.case.index();
        let profile = match self.profile {
            ProfileKind::Wedge => "wedge",
            ProfileKind::Smooth => "smooth",
        };
        for &key in KEYS {
            let value = match key {
                "label" => self.label.clone(),
                "out_dir" => self.out_dir.display().to_string(),
                "a" => self.a.to_string(),
                "N" => self.n.to_string(),
                "alpha" => self.alpha.to_string(),
                "beta" => self.beta.to_string(),
                "theta0_over_pi" => self.theta0_over_pi.to_string(),
                "epsilon" => self.epsilon.to_string(),
                "case" => case.to_string(),
                "A" => self.pressure_coeff.to_string(),
                "gamma" => self.gamma.to_string(),
                "cfl" => self.cfl.to_string(),
                "T" => self.t_final.to_string(),
                "output_times" => join(&self.output_times),
                "metric_times" => join(&self.metric_times),
                "metric_samples" => self.metric_samples.to_string(),
                "rho_floor_init" => self.rho_floor_init.to_string(),
                "rho_floor_limiter" => self.rho_floor_limiter.to_string(),
                "poisson_tol" => self.poisson_tol.to_string(),
                "peak_threshold" => self.peak_threshold.to_string(),
                "peak_window" => self.peak_window.to_string(),
                "peak_min_size" => self.peak_min_size.to_string(),
                "profile" => profile.to_string(),
                "bump_amplitude" => self.bump_amplitude.to_string(),
                "bump_width" => self.bump_width.to_string(),
                _ => unreachable!("key list and serializer out of sync"),
            };
            let _ = writeln!(s, "{key} = {value}");
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.fluid().validate()?;
        if self.profile == ProfileKind::Wedge {
            self.vorticity().validate()?;
        } else if !(self.bump_width > 0.0 && self.bump_amplitude.is_finite()) {
            return Err(Error::config("bump_width", "smooth profile needs width > 0 and finite amplitude"));
        }
        TimeController::new(self.cfl, self.t_final)?;
        for (key, times) in [("output_times", &self.output_times), ("metric_times", &self.metric_times)] {
            if times.iter().any(|&t| !(t >= 0.0 && t <= self.t_final)) {
                return Err(Error::config(key, format!("times must lie in [0, T = {}]", self.t_final)));
            }
            if times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::config(key, "times must be strictly increasing"));
            }
        }
        if self.metric_samples == 0 {
            return Err(Error::config("metric_samples", "must be >= 1"));
        }
        for (key, v) in [
            ("rho_floor_init", self.rho_floor_init),
            ("rho_floor_limiter", self.rho_floor_limiter),
            ("poisson_tol", self.poisson_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be > 0, got {v}")));
            }
        }
        self.peaks().validate()?;
        if self.label.is_empty() {
            return Err(Error::config("label", "must not be empty"));
        }
        Ok(())
    }

    /// Non-fatal diagnostics about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if let Ok(g) = self.grid() {
            if self.profile == ProfileKind::Wedge && self.epsilon < 2.0 * g.dx() {
                w.push(format!(
                    "epsilon = {} is below two cells (dx = {}); the mollified core is barely resolved",
                    self.epsilon,
                    g.dx()
                ));
            }
        }
        w
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.a, self.n)
    }

    pub fn theta0(&self) -> f64 {
        self.theta0_over_pi * std::f64::consts::PI
    }

    pub fn vorticity(&self) -> VorticityParams {
        VorticityParams {
            alpha: self.alpha,
            theta0: self.theta0(),
            epsilon: self.epsilon,
            case: self.case,
        }
    }

    pub fn profile(&self) -> VorticityProfile {
        match self.profile {
            ProfileKind::Wedge => VorticityProfile::Wedge(self.vorticity()),
            ProfileKind::Smooth => VorticityProfile::SmoothBump {
                amplitude: self.bump_amplitude,
                width: self.bump_width,
            },
        }
    }

    pub fn fluid(&self) -> FluidParams {
        FluidParams {
            beta: self.beta,
            pressure_coeff: self.pressure_coeff,
            gamma: self.gamma,
        }
    }

    pub fn solver(&self) -> SolverSettings {
        SolverSettings {
            cfl: self.cfl,
            limiter_floor: self.rho_floor_limiter,
        }
    }

    pub fn peaks(&self) -> PeakSettings {
        PeakSettings {
            threshold: self.peak_threshold,
            window: self.peak_window,
            min_size: self.peak_min_size,
        }
    }

    /// Snapshot times, defaulting to the final time.
    pub fn snapshot_times(&self) -> Vec<f64> {
        if self.output_times.is_empty() {
            vec![self.t_final]
        } else {
            self.output_times.clone()
        }
    }

    /// Pair-metric sample times: explicit list, or `t = 0` followed by
    /// `metric_samples` uniform samples ending at `T`.
    pub fn sample_times(&self) -> Vec<f64> {
        if !self.metric_times.is_empty() {
            return self.metric_times.clone();
        }
        let k = self.metric_samples;
        let mut t: Vec<f64> = (0..=k).map(|i| self.t_final * i as f64 / k as f64).collect();
        t.dedup();
        t
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::parse(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_the_baseline() {
        let cfg = ExperimentConfig::parse("", "empty").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!((cfg.a, cfg.n, cfg.epsilon, cfg.gamma, cfg.pressure_coeff), (0.2, 200, 0.004, 1.4, 1.0));
    }

    #[test]
    fn example_three_header() {
        let cfg = ExperimentConfig::parse("beta = 0\nalpha = 0.95\ntheta0_over_pi = 0.125", "x").unwrap();
        assert_eq!(cfg.beta, 0.0);
        assert_eq!(cfg.alpha, 0.95);
        assert_eq!(cfg.theta0(), std::f64::consts::FRAC_PI_8);
    }

    #[test]
    fn odd_n_is_a_range_error() {
        match ExperimentConfig::parse("N = 7", "x") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "N"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match ExperimentConfig::parse("# comment\n\nalpha = 0.5\nbogus = 1\n", "f.cfg") {
            Err(Error::Parse { line, reason, .. }) => {
                assert_eq!(line, 4);
                assert!(reason.contains("bogus"));
            }
            other => panic!("{other:?}"),
        }
        match ExperimentConfig::parse("alpha 0.5", "f.cfg") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        match ExperimentConfig::parse("alpha = x", "f.cfg") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn range_violations_name_the_key() {
        for (text, key) in [
            ("alpha = 2.5", "alpha"),
            ("theta0_over_pi = 0.6", "theta0_over_pi"),
            ("epsilon = 0", "epsilon"),
            ("gamma = 1", "gamma"),
            ("A = -1", "A"),
            ("beta = -0.1", "beta"),
            ("cfl = 0.5", "cfl"),
            ("T = 1\noutput_times = 0.5, 2", "output_times"),
            ("output_times = 0.5, 0.2", "output_times"),
            ("peak_threshold = 1.5", "peak_threshold"),
        ] {
            match ExperimentConfig::parse(text, "x") {
                Err(Error::Config { key: k, .. }) => assert_eq!(k, key, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("output_times", "0.25, 0.5, 1").unwrap();
        cfg.set("theta0_over_pi", "0.1").unwrap();
        cfg.set("case", "2").unwrap();
        cfg.set("profile", "smooth").unwrap();
        cfg.set("label", "demo").unwrap();
        let back = ExperimentConfig::parse(&cfg.to_text(), "rt").unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn default_sample_times() {
        let cfg = ExperimentConfig::default();
        let t = cfg.sample_times();
        assert_eq!(t.len(), 21);
        assert_eq!(t[0], 0.0);
        assert_eq!(*t.last().unwrap(), 1.0);
    }

    #[test]
    fn coarse_epsilon_warns() {
        let cfg = ExperimentConfig::parse("N = 100", "x").unwrap();
        assert_eq!(cfg.warnings().len(), 1);
        assert!(ExperimentConfig::default().warnings().is_empty());
    }
}
