//! Compressible isentropic Euler flow from singular wedge vorticity.
//!
//! The crate builds mollified wedge-vorticity initial data, evolves it
//! with a positivity-preserving P1 discontinuous-Galerkin scheme, and
//! post-processes the results into vorticity diagnostics that distinguish
//! single-spiral from two-spiral roll-up.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod initial_data;
pub mod poisson;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{polar, Grid};
