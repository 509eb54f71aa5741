//! One-dimensional fourth-order stencils applied along grid axes, and the
//! Maxwellian-weighted second derivatives used by the collision operators.
//!
//! The operator stencils work on `ψ = f/μ^{1/2}` extended by zero outside the
//! cube and are mapped back through the product rule
//! `∂_ij f = μ^{1/2}[∂_ij ψ − (v_i ∂_j ψ + v_j ∂_i ψ)/2 + (v_i v_j/4 − δ_ij/2) ψ]`.
//! Differencing `ψ` rather than `f` keeps the conjugated operator well
//! resolved in the Gaussian tail, where neighbouring values of `μ^{1/2}`
//! differ by a factor `e^{|v|h/2}`.

use super::VelocityGrid;
use crate::kernel::maxwellian;

/// Index pairs `(i, j)`, `i ≤ j`, in storage order.
pub const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
/// Multiplicity of each pair in a full `Σ_ij` contraction.
pub const PAIR_MULT: [f64; 6] = [1.0, 2.0, 2.0, 1.0, 2.0, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stencil {
    /// Centred first derivative, zero outside the cube.
    D1Zero,
    /// Centred second derivative, zero outside the cube.
    D2Zero,
    /// First derivative with one-sided closures on the outer two layers.
    D1OneSided,
    /// Second derivative with one-sided closures on the outer two layers.
    D2OneSided,
}

const D1C: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D2C: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const D1_EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const D1_EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
const D2_EDGE0: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
const D2_EDGE1: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];

fn line(st: Stencil, h: f64, x: &[f64], y: &mut [f64]) {
    let n = x.len();
    let (scale, centred) = match st {
        Stencil::D1Zero | Stencil::D1OneSided => (1.0 / (12.0 * h), &D1C),
        Stencil::D2Zero | Stencil::D2OneSided => (1.0 / (12.0 * h * h), &D2C),
    };
    for i in 0..n {
        let mut acc = 0.0;
        for (o, c) in centred.iter().enumerate() {
            let p = i as isize + o as isize - 2;
            if p >= 0 && (p as usize) < n {
                acc += c * x[p as usize];
            }
        }
        y[i] = acc * scale;
    }
    let one_sided = |y: &mut [f64], i: usize, coef: &[f64], mirror: bool, odd: bool| {
        let mut acc = 0.0;
        for (o, c) in coef.iter().enumerate() {
            let p = if mirror { n - 1 - o } else { o };
            acc += c * x[p];
        }
        let sign = if mirror && odd { -1.0 } else { 1.0 };
        let idx = if mirror { n - 1 - i } else { i };
        y[idx] = sign * acc * scale;
    };
    match st {
        Stencil::D1OneSided => {
            one_sided(y, 0, &D1_EDGE0, false, true);
            one_sided(y, 1, &D1_EDGE1, false, true);
            one_sided(y, 0, &D1_EDGE0, true, true);
            one_sided(y, 1, &D1_EDGE1, true, true);
        }
        Stencil::D2OneSided => {
            one_sided(y, 0, &D2_EDGE0, false, false);
            one_sided(y, 1, &D2_EDGE1, false, false);
            one_sided(y, 0, &D2_EDGE0, true, false);
            one_sided(y, 1, &D2_EDGE1, true, false);
        }
        _ => {}
    }
}

/// Applies a stencil along `axis` of a field stored in grid order.
pub fn apply_axis(g: &VelocityGrid, data: &[f64], axis: usize, st: Stencil) -> Vec<f64> {
    let n = g.n();
    let h = g.h();
    let stride = match axis {
        0 => n * n,
        1 => n,
        _ => 1,
    };
    let mut out = vec![0.0; data.len()];
    let mut xin = vec![0.0; n];
    let mut yout = vec![0.0; n];
    for a in 0..n {
        for b in 0..n {
            let base = match axis {
                0 => a * n + b,
                1 => a * n * n + b,
                _ => (a * n + b) * n,
            };
            for t in 0..n {
                xin[t] = data[base + t * stride];
            }
            line(st, h, &xin, &mut yout);
            for t in 0..n {
                out[base + t * stride] = yout[t];
            }
        }
    }
    out
}

/// Maxwellian-weighted second derivatives on a fixed grid.
#[derive(Clone, Debug)]
pub struct WeightedDerivatives {
    grid: VelocityGrid,
    sqrt_mu: Vec<f64>,
    coords: [Vec<f64>; 3],
}

impl WeightedDerivatives {
    pub fn new(grid: VelocityGrid) -> Self {
        let sqrt_mu = (0..grid.len()).map(|i| maxwellian(&grid.node(i)).sqrt()).collect();
        let coords = [0, 1, 2].map(|a| (0..grid.len()).map(|i| grid.node(i)[a]).collect());
        Self { grid, sqrt_mu, coords }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    /// `μ^{1/2}` at the nodes.
    pub fn sqrt_mu(&self) -> &[f64] {
        &self.sqrt_mu
    }

    /// Conjugated stencils `M_ij ψ = D_ij ψ − (v_i D_j ψ + v_j D_i ψ)/2 + (v_i v_j/4 − δ_ij/2) ψ`
    /// for every pair in [`PAIRS`].
    pub fn conjugated(&self, psi: &[f64]) -> [Vec<f64>; 6] {
        let g = &self.grid;
        let d1 = [0, 1, 2].map(|a| apply_axis(g, psi, a, Stencil::D1Zero));
        PAIRS.map(|(i, j)| {
            let dij = if i == j {
                apply_axis(g, psi, i, Stencil::D2Zero)
            } else {
                apply_axis(g, &d1[i], j, Stencil::D1Zero)
            };
            let (vi, vj) = (&self.coords[i], &self.coords[j]);
            let diag = if i == j { 0.5 } else { 0.0 };
            (0..psi.len())
                .map(|p| {
                    dij[p] - 0.5 * (vi[p] * d1[j][p] + vj[p] * d1[i][p])
                        + (0.25 * vi[p] * vj[p] - diag) * psi[p]
                })
                .collect()
        })
    }

    /// Transpose of `M_ij` applied to `x`.
    pub fn conjugated_transpose(&self, pair: usize, x: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let (i, j) = PAIRS[pair];
        let dij = if i == j {
            apply_axis(g, x, i, Stencil::D2Zero)
        } else {
            apply_axis(g, &apply_axis(g, x, j, Stencil::D1Zero), i, Stencil::D1Zero)
        };
        let vix: Vec<f64> = x.iter().zip(&self.coords[i]).map(|(a, b)| a * b).collect();
        let vjx: Vec<f64> = x.iter().zip(&self.coords[j]).map(|(a, b)| a * b).collect();
        let t1 = apply_axis(g, &vix, j, Stencil::D1Zero);
        let t2 = apply_axis(g, &vjx, i, Stencil::D1Zero);
        let (vi, vj) = (&self.coords[i], &self.coords[j]);
        let diag = if i == j { 0.5 } else { 0.0 };
        (0..x.len())
            .map(|p| dij[p] + 0.5 * (t1[p] + t2[p]) + (0.25 * vi[p] * vj[p] - diag) * x[p])
            .collect()
    }

    /// `∂_ij f` for every pair, through the weighted product rule.
    pub fn apply(&self, f: &[f64]) -> [Vec<f64>; 6] {
        let psi: Vec<f64> = f.iter().zip(&self.sqrt_mu).map(|(a, s)| a / s).collect();
        let mut out = self.conjugated(&psi);
        for d in out.iter_mut() {
            for (x, s) in d.iter_mut().zip(&self.sqrt_mu) {
                *x *= s;
            }
        }
        out
    }

    /// `Σ_ij coef_ij ∂_ij f` with the full symmetric sum over `i, j`.
    pub fn contract(&self, coef: &[Vec<f64>; 6], f: &[f64]) -> Vec<f64> {
        let d = self.apply(f);
        let mut out = vec![0.0; f.len()];
        for (q, dq) in d.iter().enumerate() {
            let m = PAIR_MULT[q];
            for ((o, c), x) in out.iter_mut().zip(&coef[q]).zip(dq) {
                *o += m * c * x;
            }
        }
        out
    }
}
