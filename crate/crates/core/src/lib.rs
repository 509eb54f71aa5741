//! Numerical laboratory for the spatially homogeneous Landau equation with
//! hard potentials on a truncated three-dimensional velocity grid.

pub mod diagnostics;
pub mod error;
pub mod kernel;
pub mod linop;
pub mod nonlinear;
pub mod vgrid;

pub use error::{Error, Result};
