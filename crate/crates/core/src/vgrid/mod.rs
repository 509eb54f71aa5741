//! Truncated cubic velocity lattice, grid fields, midpoint quadrature, finite
//! differences and FFT-based linear convolution against the Landau kernel.

mod conv;
pub mod diff;
pub mod io;

pub use conv::{Component, ConvolvedFields, Convolver, COMPONENTS};
pub use diff::WeightedDerivatives;

use crate::error::{Error, Result};
use crate::kernel::{maxwellian, Vec3};
use serde::{Deserialize, Serialize};

/// Cell-centred lattice on `[−vmax, vmax]³` with `n` nodes per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    n: usize,
    vmax: f64,
    h: f64,
}

impl VelocityGrid {
    pub fn new(n: usize, vmax: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidParam(format!("n = {n} must be even and at least 8")));
        }
        if !(vmax > 0.0 && vmax.is_finite()) {
            return Err(Error::InvalidParam(format!("vmax = {vmax} must be positive")));
        }
        // μ^{1/2} at the cube corner must stay a normal float for the weighted stencils
        if 3.0 * vmax * vmax / 4.0 > 650.0 {
            return Err(Error::InvalidParam(format!("vmax = {vmax} too large")));
        }
        Ok(Self { n, vmax, h: 2.0 * vmax / n as f64 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vmax(&self) -> f64 {
        self.vmax
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of nodes, `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell volume `h³`.
    pub fn cell(&self) -> f64 {
        self.h * self.h * self.h
    }

    /// Coordinate of node `i` along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.vmax + (i as f64 + 0.5) * self.h
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    #[inline]
    pub fn node(&self, idx: usize) -> Vec3 {
        let (i, j, k) = self.unravel(idx);
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    /// Whether the node lies within `width` cells of a face of the cube.
    pub fn near_boundary(&self, idx: usize, width: usize) -> bool {
        let (i, j, k) = self.unravel(idx);
        let n = self.n;
        [i, j, k].iter().any(|&c| c < width || c + width >= n)
    }
}

/// A real value per lattice node.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    grid: VelocityGrid,
    data: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: VelocityGrid) -> Self {
        Self { grid, data: vec![0.0; grid.len()] }
    }

    pub fn from_vec(grid: VelocityGrid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidParam(format!(
                "field has {} values, grid needs {}",
                data.len(),
                grid.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("field value at node {i}")));
        }
        Ok(Self { grid, data })
    }

    pub(crate) fn from_vec_unchecked(grid: VelocityGrid, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), grid.len());
        Self { grid, data }
    }

    pub fn from_fn<F: FnMut(&Vec3) -> f64>(grid: VelocityGrid, mut f: F) -> Self {
        let data = (0..grid.len()).map(|i| f(&grid.node(i))).collect();
        Self { grid, data }
    }

    /// The discretized Maxwellian.
    pub fn maxwellian(grid: VelocityGrid) -> Self {
        Self::from_fn(grid, maxwellian)
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn check_same_grid(&self, other: &GridField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn scaled(&self, a: f64) -> GridField {
        Self { grid: self.grid, data: self.data.iter().map(|x| a * x).collect() }
    }

    /// `self += a·x`.
    pub fn axpy(&mut self, a: f64, x: &GridField) -> Result<()> {
        self.check_same_grid(x)?;
        for (y, xv) in self.data.iter_mut().zip(&x.data) {
            *y += a * xv;
        }
        Ok(())
    }

    /// `a·self + b·x` as a fresh field.
    pub fn lincomb(&self, a: f64, x: &GridField, b: f64) -> Result<GridField> {
        self.check_same_grid(x)?;
        let data = self.data.iter().zip(&x.data).map(|(u, v)| a * u + b * v).collect();
        Ok(Self { grid: self.grid, data })
    }

    pub fn sub(&self, x: &GridField) -> Result<GridField> {
        self.lincomb(1.0, x, -1.0)
    }

    pub fn add(&self, x: &GridField) -> Result<GridField> {
        self.lincomb(1.0, x, 1.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `∫_{|v|∞ > vmax − 2h} |f|`, the mass sitting in the two outer cell layers.
    pub fn boundary_mass(&self) -> f64 {
        let c = self.grid.cell();
        (0..self.grid.len())
            .filter(|&i| self.grid.near_boundary(i, 2))
            .map(|i| self.data[i].abs())
            .sum::<f64>()
            * c
    }
}

/// Midpoint quadrature `h³ Σ w(v)·f(v)`.
pub fn integrate<F: Fn(&Vec3) -> f64>(field: &GridField, weight_fn: F) -> f64 {
    let g = field.grid();
    field
        .data()
        .iter()
        .enumerate()
        .map(|(i, f)| if *f == 0.0 { 0.0 } else { weight_fn(&g.node(i)) * f })
        .sum::<f64>()
        * g.cell()
}

/// Fourth-order finite-difference `∂_ij`, with one-sided stencils of the same
/// order on the two outer layers.
pub fn second_derivative(field: &GridField, i: usize, j: usize) -> Result<GridField> {
    if i > 2 || j > 2 {
        return Err(Error::InvalidParam(format!("axis pair ({i}, {j}) out of range")));
    }
    let g = *field.grid();
    let out = if i == j {
        diff::apply_axis(&g, field.data(), i, diff::Stencil::D2OneSided)
    } else {
        let t = diff::apply_axis(&g, field.data(), i, diff::Stencil::D1OneSided);
        diff::apply_axis(&g, &t, j, diff::Stencil::D1OneSided)
    };
    Ok(GridField::from_vec_unchecked(g, out))
}
