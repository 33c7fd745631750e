//! Wedge-vorticity initial data and its three mollification families.
//!
//! The singular profile is `r^-alpha phi(theta)` where `phi` is a
//! pi-periodic hat of half-width `theta0`. Inside `r <= eps` it is replaced
//! by a constant plateau (case 0), an angular plateau (case 1) or zero
//! (case 2). Velocities come from the stream function through
//! `u = psi_y`, `v = -psi_x`, with `lap(psi) = omega`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{polar, Grid};
use crate::poisson::{solve_poisson_with_report, NodeField, PoissonReport};
use crate::solver::dg::{p1_from_corners, CellCoeffs, DGField};
use crate::solver::flux::FluidParams;
use crate::solver::limiter::positivity_limiter;

/// How the singular core `r <= eps` is filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MollifierCase {
    /// Case 0: `eps^-alpha`.
    ConstantCore,
    /// Case 1: `eps^-alpha phi(theta)`.
    AngularCore,
    /// Case 2: zero.
    EmptyCore,
}

impl MollifierCase {
    pub const ALL: [MollifierCase; 3] = [Self::ConstantCore, Self::AngularCore, Self::EmptyCore];

    pub fn index(self) -> u8 {
        match self {
            Self::ConstantCore => 0,
            Self::AngularCore => 1,
            Self::EmptyCore => 2,
        }
    }

    pub fn from_index(k: u8) -> Option<Self> {
        match k {
            0 => Some(Self::ConstantCore),
            1 => Some(Self::AngularCore),
            2 => Some(Self::EmptyCore),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VorticityParams {
    pub alpha: f64,
    pub theta0: f64,
    pub epsilon: f64,
    pub case: MollifierCase,
}

impl VorticityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::config("alpha", format!("must lie in (0, 2), got {}", self.alpha)));
        }
        if !(self.theta0 > 0.0 && self.theta0 < FRAC_PI_2) {
            return Err(Error::config(
                "theta0_over_pi",
                format!("must lie in (0, 1/2), got {}", self.theta0 / PI),
            ));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::config("epsilon", format!("must be > 0, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Initial vorticity profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VorticityProfile {
    Wedge(VorticityParams),
    /// Smooth stand-in `amplitude (x / width)^2 exp(-r^2 / width^2)`, with
    /// the same two-lobe, point-symmetric layout along the x-axis.
    SmoothBump { amplitude: f64, width: f64 },
}

impl VorticityProfile {
    pub fn at(&self, x: f64, y: f64) -> f64 {
        match self {
            VorticityProfile::Wedge(p) => {
                let (r, theta) = polar(x, y);
                case_vorticity(r, theta, p)
            }
            VorticityProfile::SmoothBump { amplitude, width } => {
                let s = x / width;
                amplitude * s * s * (-(x * x + y * y) / (width * width)).exp()
            }
        }
    }
}

/// The pi-periodic hat profile.
pub fn phi(theta: f64, theta0: f64) -> f64 {
    // fold into (-pi/2, pi/2]
    let mut t = theta.rem_euclid(PI);
    if t > FRAC_PI_2 {
        t -= PI;
    }
    let t = t.abs();
    if t < theta0 {
        theta0 - t
    } else {
        0.0
    }
}

/// `r^-alpha phi(theta)`; undefined at the origin.
pub fn base_vorticity(r: f64, theta: f64, p: &VorticityParams) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("base vorticity needs r > 0, got {r}")));
    }
    Ok(r.powf(-p.alpha) * phi(theta, p.theta0))
}

/// Mollified vorticity for the selected case.
pub fn case_vorticity(r: f64, theta: f64, p: &VorticityParams) -> f64 {
    if r > p.epsilon {
        return r.powf(-p.alpha) * phi(theta, p.theta0);
    }
    match p.case {
        MollifierCase::ConstantCore => p.epsilon.powf(-p.alpha),
        MollifierCase::AngularCore => p.epsilon.powf(-p.alpha) * phi(theta, p.theta0),
        MollifierCase::EmptyCore => 0.0,
    }
}

/// `max(r^beta, floor)`, identically 1 when `beta = 0`.
pub fn initial_density(r: f64, beta: f64, floor: f64) -> f64 {
    if beta == 0.0 {
        return 1.0;
    }
    r.powf(beta).max(floor)
}

/// Central differences `u = psi_y`, `v = -psi_x` at every node; psi outside
/// the domain is taken as zero.
pub fn node_velocities(psi: &NodeField) -> (NodeField, NodeField) {
    let grid = *psi.grid();
    let n = grid.n();
    let (dx, dy) = (grid.dx(), grid.dy());
    let at = |i: isize, j: isize| {
        if i < 0 || j < 0 || i > n as isize || j > n as isize {
            0.0
        } else {
            psi.get(i as usize, j as usize)
        }
    };
    let mut u = NodeField::zeros(grid);
    let mut v = NodeField::zeros(grid);
    for j in 0..=n {
        for i in 0..=n {
            let (ii, jj) = (i as isize, j as isize);
            u.set(i, j, (at(ii, jj + 1) - at(ii, jj - 1)) / (2.0 * dy));
            v.set(i, j, -(at(ii + 1, jj) - at(ii - 1, jj)) / (2.0 * dx));
        }
    }
    (u, v)
}

/// Everything produced while building an initial DG state.
#[derive(Debug, Clone)]
pub struct InitialState {
    pub field: DGField,
    pub vorticity: NodeField,
    pub stream: NodeField,
    pub u: NodeField,
    pub v: NodeField,
    pub poisson: PoissonReport,
}

/// Builds the DG state for the mollified wedge data.
pub fn build_initial_state(
    grid: &Grid,
    vp: &VorticityParams,
    fp: &FluidParams,
    rho_floor: f64,
    poisson_tol: f64,
) -> Result<InitialState> {
    vp.validate()?;
    build_from_profile(grid, &VorticityProfile::Wedge(*vp), fp, rho_floor, poisson_tol)
}

pub fn build_from_profile(
    grid: &Grid,
    profile: &VorticityProfile,
    fp: &FluidParams,
    rho_floor: f64,
    poisson_tol: f64,
) -> Result<InitialState> {
    fp.validate()?;
    if !(rho_floor > 0.0) {
        return Err(Error::config("rho_floor_init", format!("must be > 0, got {rho_floor}")));
    }
    let omega = NodeField::from_fn(*grid, |x, y| profile.at(x, y));
    let (psi, poisson) = solve_poisson_with_report(grid, &omega, poisson_tol)?;
    let (u, v) = node_velocities(&psi);
    let rho = NodeField::from_fn(*grid, |x, y| initial_density(x.hypot(y), fp.beta, rho_floor));

    let n = grid.n();
    let mut cells: Vec<CellCoeffs> = Vec::with_capacity(grid.num_cells());
    for j in 0..n {
        for i in 0..n {
            let corners = [(i, j), (i + 1, j), (i, j + 1)];
            let r = corners.map(|(a, b)| rho.get(a, b));
            let mx = corners.map(|(a, b)| rho.get(a, b) * u.get(a, b));
            let my = corners.map(|(a, b)| rho.get(a, b) * v.get(a, b));
            cells.push([
                p1_from_corners(r[0], r[1], r[2]),
                p1_from_corners(mx[0], mx[1], mx[2]),
                p1_from_corners(my[0], my[1], my[2]),
            ]);
        }
    }
    let mut field = DGField::new(*grid, *fp, cells)?;
    positivity_limiter(&mut field, rho_floor)?;
    Ok(InitialState {
        field,
        vorticity: omega,
        stream: psi,
        u,
        v,
        poisson,
    })
}

/// Midpoint-rule `L1` distance between the mollified and singular profiles.
pub fn mollification_l1_error(grid: &Grid, p: &VorticityParams) -> f64 {
    let n = grid.n();
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            let (x, y) = grid.center(i, j);
            let (r, theta) = polar(x, y);
            if r == 0.0 {
                continue;
            }
            let exact = r.powf(-p.alpha) * phi(theta, p.theta0);
            sum += (case_vorticity(r, theta, p) - exact).abs();
        }
    }
    sum * grid.cell_area()
}
