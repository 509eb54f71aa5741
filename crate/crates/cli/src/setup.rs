//! Initial data shared by the subcommands and the acceptance suite.

use faer::prelude::SpSolver;
use faer::Mat;
use landau::kernel::{dot, maxwellian, Vec3};
use landau::linop::MomentProjector;
use landau::vgrid::{GridField, VelocityGrid};
use landau::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Gaussian with temperatures `(t1, t2, t2)`, `t2 = (3 − t1)/2`, corrected so
/// its discrete mass, momentum and energy equal those of `μ` on the grid.
pub fn anisotropic_gaussian(proj: &MomentProjector, t1: f64) -> Result<GridField> {
    let grid = *proj.grid();
    let t2 = 0.5 * (3.0 - t1);
    let norm = (2.0 * std::f64::consts::PI).powf(-1.5) / (t1 * t2 * t2).sqrt();
    let mut f = GridField::from_fn(grid, |v| {
        norm * (-0.5 * (v[0] * v[0] / t1 + (v[1] * v[1] + v[2] * v[2]) / t2)).exp()
    });
    match_maxwellian_invariants(proj, &mut f)?;
    Ok(f)
}

/// Multiplies `f` by `1 + Σ c_k φ_k(v)` so that its discrete invariants equal
/// those of `μ`. Multiplicative rather than additive so that positivity
/// survives in the far field, where `f` may be much smaller than `μ`.
pub fn match_maxwellian_invariants(proj: &MomentProjector, f: &mut GridField) -> Result<()> {
    let mu = GridField::maxwellian(*proj.grid());
    let target = proj.moments(mu.data());
    let phis = proj.invariants();
    let cell = proj.grid().cell();
    // one Newton step is exact: the moments are linear in c
    let now = proj.moments(f.data());
    let gram = Mat::<f64>::from_fn(5, 5, |k, l| {
        phis[k].iter().zip(&phis[l]).zip(f.data()).map(|((a, b), x)| a * b * x).sum::<f64>() * cell
    });
    let rhs = Mat::<f64>::from_fn(5, 1, |k, _| target[k] - now[k]);
    let c = gram.partial_piv_lu().solve(&rhs);
    if !(0..5).all(|k| c.read(k, 0).is_finite()) {
        return Err(Error::Domain("singular invariant Gram matrix".into()));
    }
    for (i, x) in f.data_mut().iter_mut().enumerate() {
        let factor = 1.0 + (0..5).map(|k| c.read(k, 0) * phis[k][i]).sum::<f64>();
        *x *= factor;
    }
    if f.data().iter().any(|x| *x < 0.0) {
        return Err(Error::Domain("invariant correction made the density negative".into()));
    }
    Ok(())
}

/// `(|v|⁴ − 10|v|² + 15) μ` with its null-space part removed: the radial mode
/// orthogonal to the collision invariants.
pub fn radial_mode(proj: &MomentProjector) -> GridField {
    let mut h = GridField::from_fn(*proj.grid(), |v| {
        let r2 = dot(v, v);
        (r2 * r2 - 10.0 * r2 + 15.0) * maxwellian(v)
    });
    proj.remove(h.data_mut());
    h
}

/// A random smooth signed bump: `(c3 + c4 v1 + c5 v2 v3) exp(−|v − 2c|²/(1 + |c6|))`.
pub fn random_bump(grid: VelocityGrid, rng: &mut ChaCha8Rng) -> GridField {
    let c: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let centre = [2.0 * c[0], 2.0 * c[1], 2.0 * c[2]];
    GridField::from_fn(grid, |v| {
        let d = [v[0] - centre[0], v[1] - centre[1], v[2] - centre[2]];
        (c[3] + c[4] * v[0] + c[5] * v[1] * v[2]) * (-dot(&d, &d) / (1.0 + c[6].abs())).exp()
    })
}

/// Nonnegative Gaussian bump of width `sigma` centred at `centre`.
pub fn localized(grid: VelocityGrid, centre: Vec3, sigma: f64) -> GridField {
    GridField::from_fn(grid, |v| {
        let d = [v[0] - centre[0], v[1] - centre[1], v[2] - centre[2]];
        (-dot(&d, &d) / (2.0 * sigma * sigma)).exp()
    })
}

/// Strictly positive density `μ (1 + eps tanh(q(v)))` with `q` a random
/// quadratic form, renormalized to the invariants of `μ`.
pub fn perturbed_maxwellian(proj: &MomentProjector, eps: f64, rng: &mut ChaCha8Rng) -> Result<GridField> {
    let q: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut f = GridField::from_fn(*proj.grid(), |v| {
        let s = q[0] * v[0] * v[0] + q[1] * v[1] * v[1] + q[2] * v[2] * v[2]
            + q[3] * v[0] * v[1] + q[4] * v[1] * v[2] + q[5] * v[0] * v[2]
            + q[6] * v[0] + q[7] * v[1] + q[8] * v[2];
        maxwellian(v) * (1.0 + eps * s.tanh())
    });
    match_maxwellian_invariants(proj, &mut f)?;
    Ok(f)
}
