//! Pointwise physics of the isentropic system `p = A rho^gamma`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidParams {
    /// Initial density exponent, `rho_0 = r^beta`.
    pub beta: f64,
    /// Pressure coefficient `A`.
    pub pressure_coeff: f64,
    /// Adiabatic exponent `gamma`.
    pub gamma: f64,
}

impl Default for FluidParams {
    fn default() -> Self {
        FluidParams {
            beta: 0.0,
            pressure_coeff: 1.0,
            gamma: 1.4,
        }
    }
}

impl FluidParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::config("beta", format!("must be >= 0, got {}", self.beta)));
        }
        if !(self.pressure_coeff.is_finite() && self.pressure_coeff > 0.0) {
            return Err(Error::config("A", format!("must be > 0, got {}", self.pressure_coeff)));
        }
        if !(self.gamma.is_finite() && self.gamma > 1.0) {
            return Err(Error::config("gamma", format!("must be > 1, got {}", self.gamma)));
        }
        Ok(())
    }

    /// `A rho^gamma` without the positivity check.
    #[inline]
    pub fn pressure_unchecked(&self, rho: f64) -> f64 {
        self.pressure_coeff * rho.powf(self.gamma)
    }

    /// Sound speed `sqrt(gamma A rho^(gamma - 1))`.
    #[inline]
    pub fn sound_speed(&self, rho: f64) -> f64 {
        (self.gamma * self.pressure_coeff * rho.powf(self.gamma - 1.0)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// Conserved variables `(rho, rho u, rho v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedState {
    pub rho: f64,
    pub mx: f64,
    pub my: f64,
}

impl ConservedState {
    pub const fn new(rho: f64, mx: f64, my: f64) -> Self {
        ConservedState { rho, mx, my }
    }

    pub fn from_primitive(rho: f64, u: f64, v: f64) -> Self {
        ConservedState {
            rho,
            mx: rho * u,
            my: rho * v,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.rho, self.mx, self.my]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::InvalidArgument(format!("density must be positive, got {}", self.rho)));
        }
        if !(self.mx.is_finite() && self.my.is_finite()) {
            return Err(Error::InvalidArgument("momentum is not finite".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn velocity(&self) -> (f64, f64) {
        (self.mx / self.rho, self.my / self.rho)
    }
}

pub fn pressure(rho: f64, fluid: &FluidParams) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("pressure needs rho > 0, got {rho}")));
    }
    Ok(fluid.pressure_unchecked(rho))
}

#[inline]
pub fn physical_flux(state: &ConservedState, axis: Axis, fluid: &FluidParams) -> [f64; 3] {
    let p = fluid.pressure_unchecked(state.rho);
    let (u, v) = state.velocity();
    match axis {
        Axis::X => [state.mx, state.mx * u + p, state.mx * v],
        Axis::Y => [state.my, state.my * u, state.my * v + p],
    }
}

/// `max(|u|, |v|) + c`.
#[inline]
pub fn max_wave_speed(state: &ConservedState, fluid: &FluidParams) -> f64 {
    let (u, v) = state.velocity();
    u.abs().max(v.abs()) + fluid.sound_speed(state.rho)
}

/// Lax-Friedrichs flux from precomputed physical fluxes.
#[inline]
pub(crate) fn lf_combine(ul: &[f64; 3], fl: &[f64; 3], ur: &[f64; 3], fr: &[f64; 3], lambda: f64) -> [f64; 3] {
    let h = 0.5 * lambda;
    [
        0.5 * (fl[0] + fr[0]) - h * (ur[0] - ul[0]),
        0.5 * (fl[1] + fr[1]) - h * (ur[1] - ul[1]),
        0.5 * (fl[2] + fr[2]) - h * (ur[2] - ul[2]),
    ]
}

/// `(F(UL) + F(UR)) / 2 - lambda / 2 (UR - UL)`; `lambda` must bound both wave speeds.
pub fn lax_friedrichs_flux(
    left: &ConservedState,
    right: &ConservedState,
    axis: Axis,
    lambda: f64,
    fluid: &FluidParams,
) -> [f64; 3] {
    lf_combine(
        &left.as_array(),
        &physical_flux(left, axis, fluid),
        &right.as_array(),
        &physical_flux(right, axis, fluid),
        lambda,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const AIR: FluidParams = FluidParams {
        beta: 0.0,
        pressure_coeff: 1.0,
        gamma: 1.4,
    };

    #[test]
    fn pressure_values() {
        assert_eq!(pressure(1.0, &AIR).unwrap(), 1.0);
        assert_relative_eq!(pressure(2.0, &AIR).unwrap(), 2.0_f64.powf(1.4), max_relative = 1e-15);
        assert_relative_eq!(pressure(2.0, &AIR).unwrap(), 2.639_015_821_545_788_5, max_relative = 1e-14);
        let soft = FluidParams {
            pressure_coeff: 0.01,
            ..AIR
        };
        assert_eq!(pressure(1.0, &soft).unwrap(), 0.01);
        assert!(pressure(0.0, &AIR).is_err());
        assert!(pressure(-1.0, &AIR).is_err());
    }

    #[test]
    fn fluxes_of_simple_states() {
        assert_eq!(physical_flux(&ConservedState::new(1.0, 0.0, 0.0), Axis::X, &AIR), [0.0, 1.0, 0.0]);
        assert_eq!(physical_flux(&ConservedState::new(1.0, 1.0, 0.0), Axis::X, &AIR), [1.0, 2.0, 0.0]);
        assert_eq!(physical_flux(&ConservedState::new(1.0, 0.0, 1.0), Axis::Y, &AIR), [1.0, 0.0, 2.0]);
    }

    #[test]
    fn wave_speeds() {
        let c = 1.4_f64.sqrt();
        assert_relative_eq!(max_wave_speed(&ConservedState::new(1.0, 0.0, 0.0), &AIR), c, max_relative = 1e-15);
        assert_relative_eq!(max_wave_speed(&ConservedState::new(1.0, 2.0, 0.0), &AIR), 2.0 + c, max_relative = 1e-15);
        let s = max_wave_speed(&ConservedState::new(1e-13, 0.0, 0.0), &AIR);
        assert!(s > 0.0 && s < 1e-2);
    }

    #[test]
    fn lax_friedrichs_against_scalar_evaluation() {
        let l = ConservedState::new(1.0, 0.0, 0.0);
        let r = ConservedState::new(2.0, 0.0, 0.0);
        let f = lax_friedrichs_flux(&l, &r, Axis::X, 2.0, &AIR);
        // independent hand evaluation, component by component
        let mass = 0.5 * (0.0 + 0.0) - 1.0 * (2.0 - 1.0);
        let mom = 0.5 * (1.0 + 2.0_f64.powf(1.4)) - 1.0 * 0.0;
        assert_eq!(f[0], mass);
        assert_eq!(f[0], -1.0);
        assert_relative_eq!(f[1], mom, max_relative = 1e-15);
        assert_eq!(f[2], 0.0);
    }

    #[test]
    fn consistency_with_equal_states() {
        let u = ConservedState::new(1.3, -0.4, 0.7);
        for axis in [Axis::X, Axis::Y] {
            assert_eq!(lax_friedrichs_flux(&u, &u, axis, 17.0, &AIR), physical_flux(&u, axis, &AIR));
        }
    }
}
