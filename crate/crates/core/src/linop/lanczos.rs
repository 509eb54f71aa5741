//! Matrix-free Lanczos estimate of the gap, using only operator applies.

use super::LinearisedOperator;
use crate::error::{Error, Result};
use crate::vgrid::diff::PAIR_MULT;
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanczosReport {
    /// Leading Ritz values on the complement of the invariants, largest first.
    pub ritz: Vec<f64>,
    /// `−ritz[0]`.
    pub lambda0: f64,
    /// `|β_k y_k|` residual bound of the leading Ritz pair.
    pub residual: f64,
    pub iterations: usize,
}

/// Symmetrized conjugated operator `(T + Tᵀ)/2` applied to `g`.
fn sym_apply(op: &LinearisedOperator, g: &[f64]) -> Vec<f64> {
    let s = op.derivatives().sqrt_mu();
    let sg: Vec<f64> = g.iter().zip(s).map(|(a, b)| a * b).collect();
    let lsg = op.l_vec(&sg);
    let tg: Vec<f64> = lsg.iter().zip(s).map(|(a, b)| a / b).collect();
    let ttg = transpose_apply(op, g);
    tg.iter().zip(&ttg).map(|(a, b)| 0.5 * (a + b)).collect()
}

/// `Tᵀ g` with `T = S^{-1} (I − Π) L_raw S`.
fn transpose_apply(op: &LinearisedOperator, g: &[f64]) -> Vec<f64> {
    let s = op.derivatives().sqrt_mu();
    let mu = op.mu();
    let proj = op.projector();
    let mut y: Vec<f64> = g.iter().zip(s).map(|(a, b)| a / b).collect();
    // (I − Π)ᵀ: Πᵀ x = Σ_k φ_k c_k with G c = moments(μ x)
    let mux: Vec<f64> = y.iter().zip(mu).map(|(a, b)| a * b).collect();
    let c = proj.solve(proj.moments(&mux));
    for (k, phi) in proj.invariants().iter().enumerate() {
        for (x, p) in y.iter_mut().zip(phi) {
            *x -= c[k] * p;
        }
    }
    // nonlocal part: Σ_q mult a_q * (∂_q μ · y) − c * (μ y)
    let dmu = op.dmu();
    let weighted: Vec<Vec<f64>> = (0..6)
        .map(|q| y.iter().zip(&dmu[q]).map(|(a, d)| PAIR_MULT[q] * a * d).collect())
        .chain(std::iter::once(y.iter().zip(mu).map(|(a, m)| -a * m).collect()))
        .collect();
    let inputs: Vec<(usize, &[f64])> = weighted.iter().enumerate().map(|(q, v)| (q, v.as_slice())).collect();
    let mut out = op.convolver().convolve_sum(&inputs);
    // local part: Σ mult S^{-1} M_qᵀ S (ā_q y) − c̄ y
    let deriv = op.derivatives();
    for q in 0..6 {
        let a = op.abar()[q].data();
        let z: Vec<f64> = (0..y.len()).map(|i| s[i] * a[i] * y[i]).collect();
        let mz = deriv.conjugated_transpose(q, &z);
        for i in 0..y.len() {
            out[i] += PAIR_MULT[q] * mz[i] / s[i];
        }
    }
    for (o, (c, x)) in out.iter_mut().zip(op.cbar().data().iter().zip(&y)) {
        *o -= c * x;
    }
    out.iter().zip(s).map(|(a, b)| a * b).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lanczos with full reorthogonalization on the complement of the conjugated
/// invariants `μ^{1/2} φ_k`.
pub fn lanczos_gap(op: &LinearisedOperator, iterations: usize, seed: u64) -> Result<LanczosReport> {
    let len = op.grid().len();
    if iterations < 2 || iterations > len - 5 {
        return Err(Error::InvalidParam(format!("Lanczos iterations {iterations} out of range")));
    }
    let s = op.derivatives().sqrt_mu();
    // orthonormal basis of the deflated directions
    let mut defl: Vec<Vec<f64>> = Vec::new();
    for phi in op.projector().invariants() {
        let mut u: Vec<f64> = phi.iter().zip(s).map(|(a, b)| a * b).collect();
        for d in &defl {
            let c = dot(&u, d);
            u.iter_mut().zip(d).for_each(|(x, y)| *x -= c * y);
        }
        let nu = dot(&u, &u).sqrt();
        u.iter_mut().for_each(|x| *x /= nu);
        defl.push(u);
    }
    let orth = |x: &mut Vec<f64>, basis: &[Vec<f64>]| {
        for _ in 0..2 {
            for b in basis {
                let c = dot(x, b);
                x.iter_mut().zip(b).for_each(|(u, v)| *u -= c * v);
            }
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    orth(&mut q, &defl);
    let nq = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= nq);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    for j in 0..iterations {
        let mut w = sym_apply(op, &basis[j]);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        orth(&mut w, &defl);
        orth(&mut w, &basis);
        let b = dot(&w, &w).sqrt();
        if j + 1 == iterations || b < 1e-12 * a.abs().max(1.0) {
            beta.push(b);
            break;
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
    let k = alpha.len();
    let tri = Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = tri.selfadjoint_eigendecomposition(Side::Lower);
    let vals = eig.s().column_vector();
    let top = k - 1;
    let residual = (beta[k - 1] * eig.u().read(k - 1, top)).abs();
    let mut ritz: Vec<f64> = (0..k).map(|i| vals.read(i)).collect();
    ritz.sort_by(|x, y| y.partial_cmp(x).expect("finite Ritz values"));
    ritz.truncate(10);
    Ok(LanczosReport { lambda0: -ritz[0], ritz, residual, iterations: k })
}
