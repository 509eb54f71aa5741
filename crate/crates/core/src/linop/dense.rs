//! Dense assembly of the conjugated operator `g ↦ μ^{-1/2} L(μ^{1/2} g)`,
//! symmetric eigensolves and the matrix exponential.

use super::LinearisedOperator;
use crate::error::{Error, Result};
use crate::vgrid::diff::PAIR_MULT;
use crate::vgrid::COMPONENTS;
use faer::prelude::SpSolver;
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

/// Largest number of unknowns accepted by dense assembly.
pub const DENSE_LIMIT: usize = 20_000;
/// Null eigenvalues are those below this fraction of `|λ₆|`.
pub const GAP_TOL: f64 = 0.1;
/// Number of leading eigenpairs whose residuals are reported.
const RESIDUAL_COUNT: usize = 20;

/// Dense matrix of the conjugated operator, unsymmetrized.
///
/// Columns are assembled directly from kernel samples (nonlocal part) and
/// stencils (local part), then the moment correction is applied.
pub fn assemble_conjugated(op: &LinearisedOperator) -> Result<Mat<f64>> {
    let grid = *op.grid();
    let len = grid.len();
    if len > DENSE_LIMIT {
        return Err(Error::TooLarge(len, DENSE_LIMIT));
    }
    let n = grid.n();
    let side = 2 * n - 1;
    let cell = grid.cell();
    let conv = op.convolver();
    // kernel components on the difference lattice, offset index (di+n-1, ...)
    let mut table = vec![[0.0; 7]; side * side * side];
    for a in 0..side {
        for b in 0..side {
            for c in 0..side {
                let d = [a as isize - n as isize + 1, b as isize - n as isize + 1, c as isize - n as isize + 1];
                let entry = &mut table[(a * side + b) * side + c];
                for (q, comp) in COMPONENTS.iter().enumerate() {
                    entry[q] = conv.sample(*comp, d);
                }
            }
        }
    }
    let s = op.derivatives().sqrt_mu();
    // row factors: mult·∂_q μ / s for the six pairs, −s for c
    let row: Vec<[f64; 7]> = (0..len)
        .map(|v| {
            let mut r = [0.0; 7];
            for q in 0..6 {
                r[q] = PAIR_MULT[q] * op.dmu()[q][v] / s[v];
            }
            r[6] = -s[v];
            r
        })
        .collect();

    let mut t = Mat::<f64>::zeros(len, len);
    let unravel: Vec<(usize, usize, usize)> = (0..len).map(|i| grid.unravel(i)).collect();
    for w in 0..len {
        let (wi, wj, wk) = unravel[w];
        let sw = cell * s[w];
        let col = t.col_as_slice_mut(w);
        for v in 0..len {
            let (vi, vj, vk) = unravel[v];
            let off = ((vi + n - 1 - wi) * side + (vj + n - 1 - wj)) * side + (vk + n - 1 - wk);
            let k = &table[off];
            let r = &row[v];
            let mut acc = 0.0;
            for q in 0..7 {
                acc += r[q] * k[q];
            }
            col[v] = sw * acc;
        }
    }

    // local part Σ mult ā_q M_q − c̄ in the conjugated frame
    let deriv = op.derivatives();
    let abar = op.abar();
    let cbar = op.cbar().data();
    let mut unit = vec![0.0; len];
    for w in 0..len {
        unit[w] = 1.0;
        let m = deriv.conjugated(&unit);
        unit[w] = 0.0;
        let col = t.col_as_slice_mut(w);
        for q in 0..6 {
            let a = abar[q].data();
            let mult = PAIR_MULT[q];
            for (v, x) in m[q].iter().enumerate() {
                if *x != 0.0 {
                    col[v] += mult * a[v] * x;
                }
            }
        }
        col[w] -= cbar[w];
    }

    // (I − P) with P = S^{-1} Π S, an orthogonal projector in the flat product
    let proj = op.projector();
    let u: Vec<Vec<f64>> =
        proj.invariants().iter().map(|phi| phi.iter().zip(s).map(|(p, x)| p * x).collect()).collect();
    for w in 0..len {
        let col = t.col_as_slice_mut(w);
        let y: [f64; 5] = std::array::from_fn(|k| u[k].iter().zip(col.iter()).map(|(a, b)| a * b).sum::<f64>() * cell);
        let c = proj.solve(y);
        for k in 0..5 {
            for (x, uk) in col.iter_mut().zip(&u[k]) {
                *x -= c[k] * uk;
            }
        }
    }
    Ok(t)
}

/// `(T + Tᵀ)/2` with the relative asymmetry `‖T − Tᵀ‖_F / ‖T‖_F`.
pub struct SymmetrizedMatrix {
    pub matrix: Mat<f64>,
    pub asymmetry: f64,
}

pub fn assemble_symmetrized(op: &LinearisedOperator) -> Result<SymmetrizedMatrix> {
    let mut t = assemble_conjugated(op)?;
    let len = t.nrows();
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..len {
        for i in 0..len {
            let x = t.read(i, j);
            den += x * x;
            if i < j {
                let y = t.read(j, i);
                num += 2.0 * (x - y) * (x - y);
                let avg = 0.5 * (x + y);
                t.write(i, j, avg);
                t.write(j, i, avg);
            }
        }
    }
    Ok(SymmetrizedMatrix { matrix: t, asymmetry: (num / den).sqrt() })
}

/// Spectrum of the symmetrized conjugated operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// All eigenvalues, largest first.
    pub eigenvalues: Vec<f64>,
    pub null_count: usize,
    /// `−λ₆`.
    pub lambda0: f64,
    /// `‖S x − λ x‖` for the leading eigenpairs (empty when not computed).
    pub residuals: Vec<f64>,
    pub asymmetry: f64,
    pub gap_tol: f64,
    /// Whether every eigenvalue outside the null cluster is negative.
    pub nonnull_negative: bool,
}

impl SpectralReport {
    /// Null count is five and the gap is positive.
    pub fn resolved(&self) -> bool {
        self.null_count == 5 && self.lambda0 > 0.0 && self.nonnull_negative
    }

    pub fn leading(&self, k: usize) -> &[f64] {
        &self.eigenvalues[..k.min(self.eigenvalues.len())]
    }
}

/// Full dense eigendecomposition of the symmetrized operator.
pub fn spectral_gap(op: &LinearisedOperator) -> Result<SpectralReport> {
    let sym = assemble_symmetrized(op)?;
    Ok(spectral_gap_of(&sym, true))
}

/// Spectral report of an assembled matrix; residuals need eigenvectors and
/// are skipped when `with_residuals` is false.
pub fn spectral_gap_of(sym: &SymmetrizedMatrix, with_residuals: bool) -> SpectralReport {
    let a = &sym.matrix;
    let (mut pairs, residuals): (Vec<f64>, Vec<f64>) = if with_residuals {
        let eig = a.selfadjoint_eigendecomposition(Side::Lower);
        let s = eig.s().column_vector();
        let u = eig.u();
        let len = a.nrows();
        let vals: Vec<f64> = (0..len).map(|i| s.read(i)).collect();
        // faer returns ascending order; the leading pairs sit at the end
        let res = (0..RESIDUAL_COUNT.min(len))
            .map(|r| {
                let idx = len - 1 - r;
                let x = u.col(idx);
                let ax = a * x;
                let lam = vals[idx];
                (0..len).map(|i| (ax.read(i) - lam * x.read(i)).powi(2)).sum::<f64>().sqrt()
            })
            .collect();
        (vals, res)
    } else {
        (a.selfadjoint_eigenvalues(Side::Lower), Vec::new())
    };
    pairs.sort_by(|x, y| y.partial_cmp(x).expect("finite eigenvalues"));
    let lam6 = pairs.get(5).copied().unwrap_or(f64::NAN);
    let thresh = GAP_TOL * lam6.abs();
    let null_count = pairs.iter().filter(|l| l.abs() < thresh).count();
    let nonnull_negative = pairs.iter().all(|l| l.abs() < thresh || *l < 0.0);
    SpectralReport {
        eigenvalues: pairs,
        null_count,
        lambda0: -lam6,
        residuals,
        asymmetry: sym.asymmetry,
        gap_tol: GAP_TOL,
        nonnull_negative,
    }
}

fn norm1(a: &Mat<f64>) -> f64 {
    (0..a.ncols()).map(|j| a.col_as_slice(j).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// `Σ c_k X_k` plus `d·I`.
fn combine(terms: &[(f64, &Mat<f64>)], d: f64) -> Mat<f64> {
    let n = terms[0].1.nrows();
    let mut out = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        let col = out.col_as_slice_mut(j);
        for (c, x) in terms {
            for (o, v) in col.iter_mut().zip(x.col_as_slice(j)) {
                *o += c * v;
            }
        }
        col[j] += d;
    }
    out
}

/// `exp(t A)` by scaling and squaring with the degree-13 Padé approximant.
pub fn expm(a: &Mat<f64>, t: f64) -> Mat<f64> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let nrm = norm1(a) * t.abs();
    let squarings = if nrm > THETA13 { (nrm / THETA13).log2().ceil() as i32 } else { 0 };
    let scale = t / 2f64.powi(squarings);
    let x = combine(&[(scale, a)], 0.0);
    let x2 = &x * &x;
    let x4 = &x2 * &x2;
    let x6 = &x4 * &x2;
    let inner_u = combine(&[(B[13], &x6), (B[11], &x4), (B[9], &x2)], 0.0);
    let u_poly = combine(&[(1.0, &(&x6 * &inner_u)), (B[7], &x6), (B[5], &x4), (B[3], &x2)], B[1]);
    let u = &x * &u_poly;
    let inner_v = combine(&[(B[12], &x6), (B[10], &x4), (B[8], &x2)], 0.0);
    let v = combine(&[(1.0, &(&x6 * &inner_v)), (B[6], &x6), (B[4], &x4), (B[2], &x2)], B[0]);
    let p = combine(&[(1.0, &v), (1.0, &u)], 0.0);
    let q = combine(&[(1.0, &v), (-1.0, &u)], 0.0);
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::super::tests::{random_smooth, small_op};
    use super::*;
    use crate::vgrid::GridField;

    #[test]
    fn assembly_matches_apply() {
        let op = small_op(8);
        let t = assemble_conjugated(&op).unwrap();
        let grid = *op.grid();
        let s = op.derivatives().sqrt_mu().to_vec();
        let h = random_smooth(grid, 3);
        let lh = op.apply_l(&h).unwrap();
        let g: Vec<f64> = h.data().iter().zip(&s).map(|(a, b)| a / b).collect();
        let gm = Mat::<f64>::from_fn(grid.len(), 1, |i, _| g[i]);
        let tg = &t * &gm;
        let scale = lh.max_abs();
        for i in 0..grid.len() {
            assert!((tg.read(i, 0) * s[i] - lh.data()[i]).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn null_vectors_of_symmetrized_matrix() {
        let op = small_op(10);
        let sym = assemble_symmetrized(&op).unwrap();
        assert!(sym.asymmetry > 0.0 && sym.asymmetry < 0.5);
        let grid = *op.grid();
        let s = op.derivatives().sqrt_mu();
        let mut norm_a = 0.0f64;
        for j in 0..grid.len() {
            norm_a = norm_a.max(sym.matrix.col_as_slice(j).iter().map(|x| x.abs()).sum());
        }
        for phi in op.projector().invariants() {
            let x = Mat::<f64>::from_fn(grid.len(), 1, |i, _| phi[i] * s[i]);
            let y = &sym.matrix * &x;
            let ny = (0..grid.len()).map(|i| y.read(i, 0).abs()).fold(0.0, f64::max);
            let nx = (0..grid.len()).map(|i| x.read(i, 0).abs()).fold(0.0, f64::max);
            assert!(ny < 0.05 * norm_a * nx, "{ny} vs {}", norm_a * nx);
        }
        let _ = GridField::zeros(grid);
    }

    #[test]
    fn guard_rejects_large_grids() {
        let g = crate::vgrid::VelocityGrid::new(28, 6.0).unwrap();
        let op = LinearisedOperator::new(
            g,
            crate::kernel::CollisionKernel::new(1.0).unwrap(),
            super::super::SplitParams::none(),
        )
        .unwrap();
        assert!(matches!(assemble_conjugated(&op), Err(Error::TooLarge(21952, DENSE_LIMIT))));
    }

    #[test]
    fn expm_of_diagonal_and_nilpotent() {
        let d = Mat::<f64>::from_fn(3, 3, |i, j| if i == j { -(i as f64) * 40.0 } else { 0.0 });
        let e = expm(&d, 0.5);
        for i in 0..3 {
            assert!((e.read(i, i) - (-(i as f64) * 20.0).exp()).abs() < 1e-14);
        }
        let n = Mat::<f64>::from_fn(2, 2, |i, j| if i == 0 && j == 1 { 3.0 } else { 0.0 });
        let e = expm(&n, 2.0);
        assert!((e.read(0, 1) - 6.0).abs() < 1e-13 && (e.read(0, 0) - 1.0).abs() < 1e-14);
        // rotation generator
        let r = Mat::<f64>::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => -1.0,
            (1, 0) => 1.0,
            _ => 0.0,
        });
        let e = expm(&r, 10.0);
        assert!((e.read(0, 0) - 10f64.cos()).abs() < 1e-12);
        assert!((e.read(1, 0) - 10f64.sin()).abs() < 1e-12);
    }
}
