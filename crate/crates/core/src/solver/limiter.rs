//! Density positivity limiter.
//!
//! A P1 polynomial attains its minimum over the cell at a corner, so
//! scaling the density slopes about the cell average until the corner
//! minimum reaches the floor keeps density above the floor everywhere in
//! the cell, including every quadrature point.

use super::dg::{corner_min, CellCoeffs, DGField, DENSITY};
use crate::error::{Error, Result};

/// Limits one cell in place. Returns `true` when the slopes were scaled.
pub fn limit_cell(cell: &mut CellCoeffs, floor: f64) -> std::result::Result<bool, String> {
    let rho = &mut cell[DENSITY];
    let mean = rho[0];
    if !(mean.is_finite() && mean >= floor) {
        return Err(format!("cell-average density {mean:e} below floor {floor:e}"));
    }
    let min = corner_min(rho);
    if min >= floor {
        return Ok(false);
    }
    let (s1, s2) = (rho[1], rho[2]);
    let mut theta = ((mean - floor) / (mean - min)).min(1.0);
    // Rounding in `mean - theta * (mean - min)` can land a few ulps of `mean`
    // below the floor; back off until the corners clear it.
    for _ in 0..4 {
        rho[1] = theta * s1;
        rho[2] = theta * s2;
        let m = corner_min(rho);
        if m >= floor {
            return Ok(true);
        }
        theta = (theta - 2.0 * (floor - m) / (mean - min) - f64::EPSILON * theta).max(0.0);
    }
    rho[1] = 0.0;
    rho[2] = 0.0;
    Ok(true)
}

/// Applies [`limit_cell`] to every cell; returns how many were modified.
pub fn positivity_limiter(field: &mut DGField, floor: f64) -> Result<usize> {
    let n = field.grid().n();
    let mut limited = 0;
    for (k, cell) in field.cells_mut().iter_mut().enumerate() {
        match limit_cell(cell, floor) {
            Ok(true) => limited += 1,
            Ok(false) => {}
            Err(reason) => {
                return Err(Error::NonPhysical {
                    i: k % n,
                    j: k / n,
                    time: f64::NAN,
                    reason,
                })
            }
        }
    }
    Ok(limited)
}
