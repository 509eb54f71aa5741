//! The linearised Landau operator `L h = Q(μ,h) + Q(h,μ)`, its split
//! `L = A0 + B0 = A + B`, the projection onto the collision invariants, and
//! the dense and matrix-free spectral machinery built on top of it.

mod certify;
mod dense;
mod lanczos;
mod semigroup;

pub use certify::{certify_split, default_target, Certificate, RadialProbe};
pub use dense::{
    assemble_conjugated, assemble_symmetrized, expm, spectral_gap, spectral_gap_of, SpectralReport,
    SymmetrizedMatrix, DENSE_LIMIT, GAP_TOL,
};
pub use lanczos::{lanczos_gap, LanczosReport};
pub use semigroup::{evolve_semigroup, propagate as semigroup_propagate, Generator, SemigroupTrace};

use crate::error::{Error, Result};
use crate::kernel::{norm, CollisionKernel, Vec3};
use crate::vgrid::diff::PAIR_MULT;
use crate::vgrid::{Component, Convolver, GridField, VelocityGrid, WeightedDerivatives};
use serde::{Deserialize, Serialize};

/// Smooth bump: 1 on `|u| ≤ 1`, 0 on `|u| ≥ 2`.
pub fn chi(u: f64) -> f64 {
    let a = u.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let x = a - 1.0;
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// Amplitude and radius of the cutoff `M χ_R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitParams {
    m: f64,
    r: f64,
}

impl SplitParams {
    pub fn new(m: f64, r: f64) -> Result<Self> {
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::InvalidParam(format!("split amplitude M = {m} must be >= 0")));
        }
        if !(r >= 1.0 && r.is_finite()) {
            return Err(Error::InvalidParam(format!("split radius R = {r} must be >= 1")));
        }
        Ok(Self { m, r })
    }

    /// `M = 0, R = 1`: `A = A0`, `B = B0`.
    pub fn none() -> Self {
        Self { m: 0.0, r: 1.0 }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `χ_R(v) = χ(v/R)`.
    pub fn chi_r(&self, v: &Vec3) -> f64 {
        chi(norm(v) / self.r)
    }
}

/// Orthogonal projection onto `span{μ, v μ, |v|² μ}` in `L²(μ^{-1/2})`.
#[derive(Clone, Debug)]
pub struct MomentProjector {
    grid: VelocityGrid,
    phis: [Vec<f64>; 5],
    basis: [Vec<f64>; 5],
    chol: [[f64; 5]; 5],
    cond: f64,
}

/// Gram condition numbers above this mean the grid cannot resolve the invariants.
pub const GRAM_COND_MAX: f64 = 1e8;

impl MomentProjector {
    pub fn new(grid: VelocityGrid) -> Result<Self> {
        let len = grid.len();
        let mut phis: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; len]);
        let mut basis: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; len]);
        for idx in 0..len {
            let v = grid.node(idx);
            let mu = crate::kernel::maxwellian(&v);
            let vals = [1.0, v[0], v[1], v[2], v[0] * v[0] + v[1] * v[1] + v[2] * v[2]];
            for k in 0..5 {
                phis[k][idx] = vals[k];
                basis[k][idx] = mu * vals[k];
            }
        }
        let cell = grid.cell();
        let mut gram = [[0.0; 5]; 5];
        for k in 0..5 {
            for l in 0..=k {
                let s: f64 = basis[k].iter().zip(&phis[l]).map(|(a, b)| a * b).sum::<f64>() * cell;
                gram[k][l] = s;
                gram[l][k] = s;
            }
        }
        let cond = sym_condition(&gram);
        if !(cond <= GRAM_COND_MAX) {
            return Err(Error::IllConditioned(cond));
        }
        let chol = cholesky5(&gram).ok_or(Error::IllConditioned(f64::INFINITY))?;
        Ok(Self { grid, phis, basis, chol, cond })
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    /// Condition number of the Gram matrix.
    pub fn condition(&self) -> f64 {
        self.cond
    }

    /// Collision invariants `1, v1, v2, v3, |v|²` at the nodes.
    pub fn invariants(&self) -> &[Vec<f64>; 5] {
        &self.phis
    }

    /// `μ` times each invariant.
    pub fn basis(&self) -> &[Vec<f64>; 5] {
        &self.basis
    }

    /// `∫ φ_k f` for the five invariants.
    pub fn moments(&self, f: &[f64]) -> [f64; 5] {
        let cell = self.grid.cell();
        std::array::from_fn(|k| self.phis[k].iter().zip(f).map(|(a, b)| a * b).sum::<f64>() * cell)
    }

    /// Coefficients `c` with `∫ φ_k Σ_l c_l μ φ_l = rhs_k`.
    pub fn solve(&self, rhs: [f64; 5]) -> [f64; 5] {
        cholesky5_solve(&self.chol, rhs)
    }

    /// `f += Σ_k c_k μ φ_k`.
    pub fn add_combination(&self, f: &mut [f64], c: [f64; 5]) {
        for (k, b) in self.basis.iter().enumerate() {
            if c[k] != 0.0 {
                for (x, y) in f.iter_mut().zip(b) {
                    *x += c[k] * y;
                }
            }
        }
    }

    /// `Π f` as a raw vector.
    pub fn project_vec(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        self.add_combination(&mut out, self.solve(self.moments(f)));
        out
    }

    /// `f ← f − Π f`.
    pub fn remove(&self, f: &mut [f64]) {
        let c = self.solve(self.moments(f));
        self.add_combination(f, c.map(|x| -x));
    }

    pub fn project(&self, h: &GridField) -> Result<GridField> {
        if *h.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(GridField::from_vec_unchecked(self.grid, self.project_vec(h.data())))
    }
}

fn cholesky5(a: &[[f64; 5]; 5]) -> Option<[[f64; 5]; 5]> {
    let mut l = [[0.0; 5]; 5];
    for i in 0..5 {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

fn cholesky5_solve(l: &[[f64; 5]; 5], b: [f64; 5]) -> [f64; 5] {
    let mut y = [0.0; 5];
    for i in 0..5 {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = [0.0; 5];
    for i in (0..5).rev() {
        let mut s = y[i];
        for k in i + 1..5 {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

fn sym_condition(a: &[[f64; 5]; 5]) -> f64 {
    let m = faer::Mat::<f64>::from_fn(5, 5, |i, j| a[i][j]);
    let ev = m.selfadjoint_eigenvalues(faer::Side::Lower);
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().cloned().fold(0.0, f64::max);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// `L = A0 + B0` around the discrete Maxwellian, with the split `A = A0 + Mχ_R`,
/// `B = B0 − Mχ_R`.
///
/// `B0 h = ā_ij ∂_ij h − c̄ h` is the local part. The nonlocal part is
/// `A0 h = (a_ij*h) ∂_ij μ − (c*h) μ − Π(...)`: the moment correction is
/// carried by `A0`, which makes `L = (I − Π) L_raw` conserve mass, momentum and
/// energy exactly on the grid.
#[derive(Clone, Debug)]
pub struct LinearisedOperator {
    grid: VelocityGrid,
    kernel: CollisionKernel,
    split: SplitParams,
    conv: Convolver,
    deriv: WeightedDerivatives,
    proj: MomentProjector,
    mu: Vec<f64>,
    abar: [GridField; 6],
    bbar: [GridField; 3],
    cbar: GridField,
    dmu: [Vec<f64>; 6],
    chi: Vec<f64>,
}

impl LinearisedOperator {
    pub fn new(grid: VelocityGrid, kernel: CollisionKernel, split: SplitParams) -> Result<Self> {
        let conv = Convolver::new(grid, kernel);
        let deriv = WeightedDerivatives::new(grid);
        let proj = MomentProjector::new(grid)?;
        let mu_field = GridField::maxwellian(grid);
        let fields = conv.convolve_all(mu_field.data());
        let abar = fields.a.map(|a| GridField::from_vec_unchecked(grid, a));
        let cbar = GridField::from_vec_unchecked(grid, fields.c);
        let bbar = [0, 1, 2].map(|i| conv.convolve_kernel(&mu_field, Component::B(i)));
        let dmu = deriv.apply(mu_field.data());
        let chi = Self::chi_field(&grid, &split);
        Ok(Self {
            grid,
            kernel,
            split,
            conv,
            deriv,
            proj,
            mu: mu_field.into_vec(),
            abar,
            bbar,
            cbar,
            dmu,
            chi,
        })
    }

    fn chi_field(grid: &VelocityGrid, split: &SplitParams) -> Vec<f64> {
        (0..grid.len()).map(|i| split.chi_r(&grid.node(i))).collect()
    }

    /// The same operator with another cutoff.
    pub fn with_split(mut self, split: SplitParams) -> Self {
        self.chi = Self::chi_field(&self.grid, &split);
        self.split = split;
        self
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &CollisionKernel {
        &self.kernel
    }

    pub fn split(&self) -> &SplitParams {
        &self.split
    }

    /// `ā_ij = a_ij * μ` in [`crate::vgrid::diff::PAIRS`] order.
    pub fn abar(&self) -> &[GridField; 6] {
        &self.abar
    }

    pub fn bbar(&self) -> &[GridField; 3] {
        &self.bbar
    }

    pub fn cbar(&self) -> &GridField {
        &self.cbar
    }

    pub fn projector(&self) -> &MomentProjector {
        &self.proj
    }

    pub(crate) fn convolver(&self) -> &Convolver {
        &self.conv
    }

    pub(crate) fn derivatives(&self) -> &WeightedDerivatives {
        &self.deriv
    }

    pub(crate) fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub(crate) fn dmu(&self) -> &[Vec<f64>; 6] {
        &self.dmu
    }

    /// Largest diagonal trace `Σ_i ā_ii` over the grid.
    pub fn max_trace_abar(&self) -> f64 {
        (0..self.grid.len())
            .map(|p| self.abar[0].data()[p] + self.abar[3].data()[p] + self.abar[5].data()[p])
            .fold(0.0, f64::max)
    }

    /// Explicit RK4 step bound `0.5 h² / (max_v Σ_i ā_ii + 3h²M/16)`; the
    /// cutoff term only matters for `B`.
    pub fn stable_dt(&self) -> f64 {
        let h2 = self.grid.h() * self.grid.h();
        0.5 * h2 / (self.max_trace_abar() + 3.0 * h2 * self.split.m() / 16.0)
    }

    fn check(&self, h: &GridField) -> Result<()> {
        if *h.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// `(a_ij*h) ∂_ij μ − (c*h) μ`, before the moment correction.
    pub(crate) fn a0_raw(&self, h: &[f64]) -> Vec<f64> {
        let cf = self.conv.convolve_all(h);
        let mut out: Vec<f64> = cf.c.iter().zip(&self.mu).map(|(c, m)| -c * m).collect();
        for q in 0..6 {
            let w = PAIR_MULT[q];
            for ((o, a), d) in out.iter_mut().zip(&cf.a[q]).zip(&self.dmu[q]) {
                *o += w * a * d;
            }
        }
        out
    }

    /// `ā_ij ∂_ij h − c̄ h`.
    pub(crate) fn b0_vec(&self, h: &[f64]) -> Vec<f64> {
        let d = self.deriv.apply(h);
        let mut out: Vec<f64> = self.cbar.data().iter().zip(h).map(|(c, x)| -c * x).collect();
        for q in 0..6 {
            let w = PAIR_MULT[q];
            for ((o, a), x) in out.iter_mut().zip(self.abar[q].data()).zip(&d[q]) {
                *o += w * a * x;
            }
        }
        out
    }

    /// `L h` as a raw vector.
    pub(crate) fn l_vec(&self, h: &[f64]) -> Vec<f64> {
        let mut out = self.a0_raw(h);
        for (o, b) in out.iter_mut().zip(self.b0_vec(h)) {
            *o += b;
        }
        self.proj.remove(&mut out);
        out
    }

    /// `B h = B0 h − M χ_R h` as a raw vector.
    pub(crate) fn b_vec(&self, h: &[f64]) -> Vec<f64> {
        let mut out = self.b0_vec(h);
        let m = self.split.m;
        if m != 0.0 {
            for ((o, c), x) in out.iter_mut().zip(&self.chi).zip(h) {
                *o -= m * c * x;
            }
        }
        out
    }

    pub fn apply_a0(&self, h: &GridField) -> Result<GridField> {
        self.check(h)?;
        let mut a = self.a0_raw(h.data());
        let b = self.b0_vec(h.data());
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let c = self.proj.solve(self.proj.moments(&sum));
        self.proj.add_combination(&mut a, c.map(|x| -x));
        Ok(GridField::from_vec_unchecked(self.grid, a))
    }

    pub fn apply_b0(&self, h: &GridField) -> Result<GridField> {
        self.check(h)?;
        Ok(GridField::from_vec_unchecked(self.grid, self.b0_vec(h.data())))
    }

    pub fn apply_l(&self, h: &GridField) -> Result<GridField> {
        self.check(h)?;
        Ok(GridField::from_vec_unchecked(self.grid, self.l_vec(h.data())))
    }

    pub fn apply_a(&self, h: &GridField) -> Result<GridField> {
        let mut out = self.apply_a0(h)?;
        let m = self.split.m;
        if m != 0.0 {
            for ((o, c), x) in out.data_mut().iter_mut().zip(&self.chi).zip(h.data()) {
                *o += m * c * x;
            }
        }
        Ok(out)
    }

    pub fn apply_b(&self, h: &GridField) -> Result<GridField> {
        self.check(h)?;
        Ok(GridField::from_vec_unchecked(self.grid, self.b_vec(h.data())))
    }

    /// `Π h` onto the discrete null space.
    pub fn projection_pi(&self, h: &GridField) -> Result<GridField> {
        self.proj.project(h)
    }

    /// `⟨−L h, h⟩` in `L²(μ^{-1/2})`.
    pub fn dirichlet_form(&self, h: &GridField) -> Result<f64> {
        let lh = self.apply_l(h)?;
        Ok(-inner_mu_inv(&lh, h))
    }
}

/// `∫ f g μ^{-1}` on the grid.
pub fn inner_mu_inv(f: &GridField, g: &GridField) -> f64 {
    let grid = f.grid();
    f.data()
        .iter()
        .zip(g.data())
        .enumerate()
        .map(|(i, (a, b))| a * b / crate::kernel::maxwellian(&grid.node(i)))
        .sum::<f64>()
        * grid.cell()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn small_op(n: usize) -> LinearisedOperator {
        let g = VelocityGrid::new(n, 5.0).unwrap();
        LinearisedOperator::new(g, CollisionKernel::new(1.0).unwrap(), SplitParams::none()).unwrap()
    }

    pub(crate) fn random_smooth(g: VelocityGrid, seed: u64) -> GridField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        GridField::from_fn(g, |v| {
            let p = c[0] + c[1] * v[0] + c[2] * v[1] + c[3] * v[2] + c[4] * v[0] * v[1]
                + c[5] * (v[2] * v[2] - 1.0)
                + c[6] * v[0] * v[0] * v[0]
                + c[7] * v[1] * v[2] * v[2];
            p * (-(v[0] - c[8]).powi(2) / 2.0 - (v[1] - c[9]).powi(2) / 2.0 - v[2] * v[2] / 2.0).exp()
        })
    }

    #[test]
    fn chi_profile() {
        assert_eq!(chi(0.5), 1.0);
        assert_eq!(chi(1.0), 1.0);
        assert_eq!(chi(2.0), 0.0);
        assert_eq!(chi(-3.0), 0.0);
        let x = chi(1.5);
        assert!(x > 0.0 && x < 1.0);
        assert!((1..100).all(|i| chi(1.0 + i as f64 / 100.0) <= chi(1.0 + (i - 1) as f64 / 100.0)));
        assert!(SplitParams::new(-1.0, 2.0).is_err());
        assert!(SplitParams::new(1.0, 0.5).is_err());
    }

    #[test]
    fn projector_basics() {
        let g = VelocityGrid::new(12, 5.0).unwrap();
        let p = MomentProjector::new(g).unwrap();
        assert!(p.condition() < 100.0);
        let mu = GridField::maxwellian(g);
        let pm = p.project(&mu).unwrap();
        assert!(pm.sub(&mu).unwrap().max_abs() < 1e-14);
        let odd = GridField::from_fn(g, |v| v[0].powi(3) * crate::kernel::maxwellian(v));
        let po = p.project(&odd).unwrap();
        let rest = odd.sub(&po).unwrap();
        assert!(inner_mu_inv(&po, &rest).abs() < 1e-10);
        let ppo = p.project(&po).unwrap();
        assert!(ppo.sub(&po).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn split_identity_and_conservation() {
        let op = small_op(10).with_split(SplitParams::new(3.0, 1.5).unwrap());
        let h = random_smooth(*op.grid(), 1);
        let a = op.apply_a(&h).unwrap();
        let b = op.apply_b(&h).unwrap();
        let l = op.apply_l(&h).unwrap();
        let scale = l.max_abs();
        assert!(a.add(&b).unwrap().sub(&l).unwrap().max_abs() < 1e-12 * scale);
        let m = op.projector().moments(l.data());
        assert!(m.iter().all(|x| x.abs() < 1e-12 * scale));
    }

    #[test]
    fn maxwellian_is_null() {
        let op = small_op(12);
        let mu = GridField::maxwellian(*op.grid());
        let a = op.apply_a0(&mu).unwrap();
        let b = op.apply_b0(&mu).unwrap();
        // discretization residual, small against L on a non-null direction
        let t = GridField::from_fn(*op.grid(), |v| (v[0] * v[0] * v[0] - 3.0 * v[0]) * crate::kernel::maxwellian(v));
        let scale = op.apply_l(&t).unwrap().max_abs();
        assert!(a.add(&b).unwrap().max_abs() < 5e-3 * scale);
        assert!(op.dirichlet_form(&mu).unwrap().abs() < 1e-10);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let op = small_op(8);
        let other = GridField::zeros(VelocityGrid::new(10, 5.0).unwrap());
        assert!(matches!(op.apply_l(&other), Err(Error::GridMismatch)));
    }
}
