//! Third-order SSP Runge-Kutta stepping and the run loop.

use super::dg::{CellCoeffs, DGField, DgOperator};
use super::limiter::positivity_limiter;
use crate::error::{Error, Result};

/// State that can be advanced by the Shu-Osher convex combinations.
pub trait RkState: Clone {
    /// `self <- a * self + b * other`.
    fn combine(&mut self, a: f64, other: &Self, b: f64);
}

impl RkState for f64 {
    fn combine(&mut self, a: f64, other: &Self, b: f64) {
        *self = a * *self + b * *other;
    }
}

impl RkState for DGField {
    fn combine(&mut self, a: f64, other: &Self, b: f64) {
        DGField::combine(self, a, other, b);
    }
}

/// One SSP-RK3 step in Shu-Osher form, where `stage(w)` is a limited
/// forward-Euler step `w + dt L(w)`.
pub fn ssp_rk3<S, E>(u: &S, mut stage: impl FnMut(&S) -> std::result::Result<S, E>) -> std::result::Result<S, E>
where
    S: RkState,
{
    let u1 = stage(u)?;
    let mut u2 = stage(&u1)?;
    u2.combine(0.25, u, 0.75);
    let mut next = stage(&u2)?;
    next.combine(2.0 / 3.0, u, 1.0 / 3.0);
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub cfl: f64,
    /// Density floor enforced by the positivity limiter after every stage.
    pub limiter_floor: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            cfl: 0.1,
            limiter_floor: 1e-13,
        }
    }
}

/// Tracks simulation time and chooses `dt = cfl * h / lambda_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeController {
    pub cfl: f64,
    pub t: f64,
    pub t_final: f64,
    pub lambda_max: f64,
    pub steps: usize,
}

impl TimeController {
    pub fn new(cfl: f64, t_final: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0 / 3.0) {
            return Err(Error::config("cfl", format!("must lie in (0, 1/3], got {cfl}")));
        }
        if !(t_final.is_finite() && t_final >= 0.0) {
            return Err(Error::config("T", format!("must be >= 0, got {t_final}")));
        }
        Ok(TimeController {
            cfl,
            t: 0.0,
            t_final,
            lambda_max: 0.0,
            steps: 0,
        })
    }

    /// Step size for mesh width `h`, truncated so that `stop` is hit exactly.
    pub fn step_size(&self, h: f64, stop: f64) -> f64 {
        let dt = self.cfl * h / self.lambda_max;
        dt.min(stop - self.t)
    }
}

/// Callbacks invoked by [`run`].
pub trait RunHooks {
    /// Called at each requested output time, with the time landed on exactly.
    fn on_output(&mut self, _t: f64, _field: &DGField) -> Result<()> {
        Ok(())
    }

    /// Called after every limited Runge-Kutta stage.
    fn on_stage(&mut self, _field: &DGField) {}
}

/// Hooks that do nothing.
pub struct NoHooks;

impl RunHooks for NoHooks {}

/// Advances the field by SSP-RK3 with the positivity limiter after each stage.
pub struct Stepper {
    op: DgOperator,
    rate: Vec<CellCoeffs>,
    settings: SolverSettings,
}

impl Stepper {
    pub fn new(settings: SolverSettings) -> Self {
        Stepper {
            op: DgOperator::new(),
            rate: Vec::new(),
            settings,
        }
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    /// Global max wave speed of `field`, leaving its traces cached for the
    /// next [`step_prepared`](Self::step_prepared).
    pub fn prepare(&mut self, field: &DGField) -> Result<f64> {
        self.op.prepare(field)
    }

    /// SSP-RK3 step whose first stage reuses the traces from [`prepare`](Self::prepare).
    pub fn step_prepared(
        &mut self,
        field: &DGField,
        lambda0: f64,
        dt: f64,
        hooks: &mut dyn RunHooks,
    ) -> Result<DGField> {
        let floor = self.settings.limiter_floor;
        let mut first = true;
        let op = &mut self.op;
        let rate = &mut self.rate;
        ssp_rk3(field, |w: &DGField| -> Result<DGField> {
            let lambda = if first {
                first = false;
                lambda0
            } else {
                op.prepare(w)?
            };
            op.assemble(w, lambda, rate);
            let mut next = w.clone();
            next.add_scaled(dt, rate);
            positivity_limiter(&mut next, floor)?;
            hooks.on_stage(&next);
            Ok(next)
        })
    }

    /// One SSP-RK3 step of size `dt`.
    pub fn step(&mut self, field: &DGField, dt: f64) -> Result<DGField> {
        let lambda0 = self.prepare(field)?;
        self.step_prepared(field, lambda0, dt, &mut NoHooks)
    }
}

/// One SSP-RK3 step with the default limiter floor.
pub fn ssp_rk3_step(field: &DGField, dt: f64) -> Result<DGField> {
    Stepper::new(SolverSettings::default()).step(field, dt)
}

/// Integrates from `tc.t` to `tc.t_final`, hitting every time in
/// `output_times` exactly and calling `hooks.on_output` there.
pub fn run(
    mut field: DGField,
    tc: &mut TimeController,
    settings: SolverSettings,
    output_times: &[f64],
    hooks: &mut dyn RunHooks,
) -> Result<DGField> {
    let mut stops: Vec<f64> = output_times
        .iter()
        .copied()
        .filter(|&t| t >= tc.t && t <= tc.t_final)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let mut outputs = stops.iter().copied().peekable();
    let mut stepper = Stepper::new(settings);
    let h = field.grid().dx().min(field.grid().dy());

    loop {
        while let Some(&t_out) = outputs.peek() {
            if t_out <= tc.t {
                hooks.on_output(t_out, &field)?;
                outputs.next();
            } else {
                break;
            }
        }
        if tc.t >= tc.t_final {
            break;
        }
        let stop = outputs.peek().copied().unwrap_or(tc.t_final).min(tc.t_final);
        let t_now = tc.t;
        let with_time = |e: Error| match e {
            Error::NonPhysical { i, j, reason, .. } => Error::NonPhysical {
                i,
                j,
                time: t_now,
                reason,
            },
            other => other,
        };
        tc.lambda_max = stepper.prepare(&field).map_err(with_time)?;
        if !(tc.lambda_max > 0.0 && tc.lambda_max.is_finite()) {
            return Err(Error::NonPhysical {
                i: 0,
                j: 0,
                time: tc.t,
                reason: format!("global wave speed {}", tc.lambda_max),
            });
        }
        let dt = tc.step_size(h, stop);
        field = stepper
            .step_prepared(&field, tc.lambda_max, dt, hooks)
            .map_err(with_time)?;
        if let Some((i, j)) = field.find_non_finite() {
            return Err(Error::NonPhysical {
                i,
                j,
                time: tc.t + dt,
                reason: "non-finite coefficient".into(),
            });
        }
        tc.steps += 1;
        tc.t = if dt >= stop - tc.t { stop } else { tc.t + dt };
        log::trace!("step {} t = {:.6} dt = {:.3e} lambda = {:.4}", tc.steps, tc.t, dt, tc.lambda_max);
    }
    Ok(field)
}
