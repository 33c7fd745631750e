//! P1 DG solver for the 2D isentropic Euler equations on a periodic grid.

pub mod dg;
pub mod flux;
pub mod limiter;
pub mod time;

pub use dg::{dg_rhs, max_wave_speed_field, CellCoeffs, DGField, DgOperator, P1};
pub use flux::{lax_friedrichs_flux, max_wave_speed, physical_flux, pressure, Axis, ConservedState, FluidParams};
pub use limiter::positivity_limiter;
pub use time::{run, ssp_rk3, ssp_rk3_step, NoHooks, RkState, RunHooks, SolverSettings, Stepper, TimeController};
