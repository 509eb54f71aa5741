//! Inequality and consistency checks on nonlinear states and runs.

use super::{relative_entropy, CollisionOperator, EvolutionTrace};
use crate::diagnostics::norm::{norm, sobolev_seminorm, NormSpec};
use crate::error::{Error, Result};
use crate::kernel::{CollisionKernel, Weight};
use crate::linop::{semigroup_propagate, Generator, LinearisedOperator};
use crate::vgrid::GridField;
use serde::{Deserialize, Serialize};

/// Mass tolerance for treating a field as a probability density.
const MASS_TOL: f64 = 1e-6;

/// `‖f − μ‖_{L¹}` against `√(2 H(f|μ))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CkpReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

pub fn ckp_check(f: &GridField) -> Result<CkpReport> {
    let g = f.grid();
    let mass: f64 = f.data().iter().sum::<f64>() * g.cell();
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::Domain(format!("mass {mass} is not 1")));
    }
    let mu = GridField::maxwellian(*g);
    let lhs = f.data().iter().zip(mu.data()).map(|(a, b)| (a - b).abs()).sum::<f64>() * g.cell();
    let floor = 1e-30 * f.max_abs();
    let rhs = (2.0 * relative_entropy(f, floor)).max(0.0).sqrt();
    Ok(CkpReport { lhs, rhs, ok: lhs <= rhs * (1.0 + 1e-3) })
}

/// `‖Q(g,h)‖_{L^p(m)}` over
/// `‖g‖_{L¹(⟨v⟩^{γ+2})} ‖∂²h‖_{L^p(m⟨v⟩^{γ+2})} + ‖g‖_{L¹(⟨v⟩^γ)} ‖h‖_{L^p(m⟨v⟩^γ)}`.
pub fn bilinear_estimate_check(g: &GridField, h: &GridField, w: &Weight, k: CollisionKernel) -> Result<f64> {
    let op = CollisionOperator::new(*g.grid(), k)?;
    bilinear_ratio(&op, g, h, w)
}

/// [`bilinear_estimate_check`] on a prepared operator.
pub fn bilinear_ratio(op: &CollisionOperator, g: &GridField, h: &GridField, w: &Weight) -> Result<f64> {
    let gamma = op.kernel().gamma();
    let q = op.apply(g, h)?;
    let m = NormSpec::from_weight(w);
    let num = norm(&q, &m)?;
    let g2 = norm(g, &NormSpec::l1_poly(gamma + 2.0)?)?;
    let g0 = norm(g, &NormSpec::l1_poly(gamma)?)?;
    let d2h = sobolev_seminorm(h, &m.with_bracket(gamma + 2.0), 2)?;
    let h0 = norm(h, &m.with_bracket(gamma))?;
    let den = g2 * d2h + g0 * h0;
    if !(den > 0.0) {
        return Err(Error::Domain("zero denominator in the bilinear estimate".into()));
    }
    Ok(num / den)
}

/// `‖h_t − S_L(t) h_0 − ∫₀ᵗ S_L(t−s) Q(h_s,h_s) ds‖_{L¹(⟨v⟩^k)}` over the
/// stored snapshots, with the trapezoid rule in `s` and `S_L` by RK4 with step
/// `dt_lin`.
pub fn duhamel_residual(run: &EvolutionTrace, op: &LinearisedOperator, k: f64, dt_lin: f64) -> Result<f64> {
    let snaps = &run.snapshots;
    if snaps.len() < 3 || snaps.len() != run.times.len() {
        return Err(Error::Insufficient(format!("{} snapshots, need at least 3 at every output", snaps.len())));
    }
    let spacing = run.times[1] - run.times[0];
    if run.times.windows(2).any(|w| ((w[1] - w[0]) - spacing).abs() > 1e-9 * spacing) {
        return Err(Error::InvalidParam("snapshots must be equally spaced".into()));
    }
    let coll = CollisionOperator::from_linear(op);
    let last = snaps.len() - 1;
    let weight = |i: usize| if i == 0 || i == last { 0.5 * spacing } else { spacing };
    // Horner form: y ← S(Δ) y + w_i Q_i
    let q0 = coll.apply(&snaps[0], &snaps[0])?;
    let mut y: Vec<f64> = snaps[0].data().iter().zip(q0.data()).map(|(h, q)| h + weight(0) * q).collect();
    for (i, snap) in snaps.iter().enumerate().skip(1) {
        y = semigroup_propagate(op, Generator::L, &y, spacing, dt_lin)?;
        let qi = coll.apply(snap, snap)?;
        for (a, b) in y.iter_mut().zip(qi.data()) {
            *a += weight(i) * b;
        }
    }
    let diff: Vec<f64> = snaps[last].data().iter().zip(&y).map(|(a, b)| a - b).collect();
    norm(&GridField::from_vec_unchecked(*op.grid(), diff), &NormSpec::l1_poly(k)?)
}
