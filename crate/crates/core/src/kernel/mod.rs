//! Pointwise kernel quantities: the Landau kernel `a, b, c`, the Maxwellian,
//! Gaussian moment integrals `J_α`, the convolved fields `ā, b̄, c̄` with their
//! eigenvalues `ℓ1, ℓ2`, weight functions and the dissipativity functional `φ`.
//!
//! Everything involving a convolution with `μ` is reduced to a one-dimensional
//! radial integral and evaluated by adaptive Gauss–Kronrod quadrature.

pub mod quad;
mod weight;

pub use weight::{
    abscissa, phi, phi_far_field, weight_value, Abscissa, PhiParams, Weight, WeightKind,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Absolute tolerance of all radial quadratures.
pub const QUAD_TOL: f64 = 1e-10;
/// Radial truncation, in standard deviations of `μ`.
const TAIL: f64 = 12.0;
/// Second and fourth moments of `μ`.
pub const M2: f64 = 3.0;
pub const M4: f64 = 15.0;

/// Interaction exponent `γ ∈ [0, 1]` of the kernel `|z|^{γ+2}(I − ẑẑᵀ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionKernel {
    gamma: f64,
}

impl CollisionKernel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidParam(format!("gamma = {gamma} outside [0, 1]")));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `|z|^γ` with the convention `0^0 = 1`.
    #[inline]
    fn pow_gamma(&self, r: f64) -> f64 {
        if self.gamma == 0.0 {
            1.0
        } else {
            r.powf(self.gamma)
        }
    }
}

#[inline]
pub fn norm(v: &Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[inline]
pub fn dot(u: &Vec3, v: &Vec3) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

/// Japanese bracket `⟨v⟩ = (1 + |v|²)^{1/2}`.
#[inline]
pub fn bracket(v: &Vec3) -> f64 {
    (1.0 + dot(v, v)).sqrt()
}

/// `a(z) = |z|^{γ+2}(I − ẑẑᵀ)`, written as `|z|^γ(|z|² I − z zᵀ)` so that `a(0) = 0`.
pub fn eval_a(z: &Vec3, k: &CollisionKernel) -> Mat3 {
    let r2 = dot(z, z);
    let mut out = [[0.0; 3]; 3];
    if r2 == 0.0 {
        return out;
    }
    let g = k.pow_gamma(r2.sqrt());
    for i in 0..3 {
        for j in 0..3 {
            let d = if i == j { r2 } else { 0.0 };
            out[i][j] = g * (d - z[i] * z[j]);
        }
    }
    out
}

/// `b(z) = −2|z|^γ z`.
pub fn eval_b(z: &Vec3, k: &CollisionKernel) -> Vec3 {
    let r = norm(z);
    if r == 0.0 {
        return [0.0; 3];
    }
    let g = -2.0 * k.pow_gamma(r);
    [g * z[0], g * z[1], g * z[2]]
}

/// `c(z) = −2(γ+3)|z|^γ`.
pub fn eval_c(z: &Vec3, k: &CollisionKernel) -> f64 {
    -2.0 * (k.gamma + 3.0) * k.pow_gamma(norm(z))
}

/// Standard Gaussian `(2π)^{−3/2} e^{−|v|²/2}`.
pub fn maxwellian(v: &Vec3) -> f64 {
    (2.0 * PI).powf(-1.5) * (-0.5 * dot(v, v)).exp()
}

// Angular integrals ∫_{-1}^{1} w(t) e^{xt} dt multiplied by e^{−(ρ²+r²)/2}, x = ρr.
// Small x uses power series, large x the stable split e^{−(ρ∓r)²/2}.
#[derive(Clone, Copy)]
enum Angular {
    One,
    OneMinusT2,
    HalfOnePlusT2,
    T,
}

const SERIES_X: f64 = 2.0;

fn angular(kind: Angular, rho: f64, r: f64) -> f64 {
    let x = rho * r;
    if x <= SERIES_X {
        let g = (-0.5 * (rho * rho + r * r)).exp();
        if g == 0.0 {
            return 0.0;
        }
        let x2 = x * x;
        let mut sum = 0.0;
        // term = x^{2k}/(2k)!, or x^{2k+1}/(2k+1)! for the odd weight
        let mut term = if matches!(kind, Angular::T) { x } else { 1.0 };
        for kk in 0..40 {
            let k2 = 2.0 * kk as f64;
            let c = match kind {
                Angular::One => 2.0 / (k2 + 1.0),
                Angular::OneMinusT2 => 4.0 / ((k2 + 1.0) * (k2 + 3.0)),
                Angular::HalfOnePlusT2 => 1.0 / (k2 + 1.0) + 1.0 / (k2 + 3.0),
                Angular::T => 2.0 / (k2 + 3.0),
            };
            let add = c * term;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
            term *= match kind {
                Angular::T => x2 / ((k2 + 2.0) * (k2 + 3.0)),
                _ => x2 / ((k2 + 1.0) * (k2 + 2.0)),
            };
        }
        g * sum
    } else {
        let em = (-0.5 * (rho - r) * (rho - r)).exp();
        let ep = (-0.5 * (rho + r) * (rho + r)).exp();
        let ch = 0.5 * (em + ep);
        let sh = 0.5 * (em - ep);
        match kind {
            Angular::One => 2.0 * sh / x,
            Angular::OneMinusT2 => 4.0 * (x * ch - sh) / (x * x * x),
            Angular::HalfOnePlusT2 => 2.0 * sh / x - 2.0 * ch / (x * x) + 2.0 * sh / (x * x * x),
            Angular::T => 2.0 * ch / x - 2.0 * sh / (x * x),
        }
    }
}

/// `(2π)^{−1/2} ∫_0^∞ r^β e^{−(ρ²+r²)/2} A(ρr) dr`, i.e. `∫ |w|^{β−2} w(t) μ(v − w) dw`.
fn radial(kind: Angular, rho: f64, beta: f64) -> f64 {
    let lo = (rho - TAIL).max(0.0);
    let hi = rho + TAIL;
    let mut breaks = vec![lo];
    for b in [rho - 4.0, rho, rho + 4.0] {
        if b > lo + 1e-12 && b < hi - 1e-12 {
            breaks.push(b);
        }
    }
    breaks.push(hi);
    let f = |r: f64| if r <= 0.0 { 0.0 } else { r.powf(beta) * angular(kind, rho, r) };
    quad::integrate_panels(f, &breaks, QUAD_TOL) / (2.0 * PI).sqrt()
}

/// `J_α(|v|)` without domain checks; valid for any `α ≥ 0`.
pub(crate) fn j_radial(rho: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 1.0;
    }
    radial(Angular::One, rho, alpha + 2.0)
}

/// `J_α(v) = ∫ |v − w|^α μ(w) dw` for `α ∈ [0, 3]`.
pub fn j_alpha(v: &Vec3, alpha: f64) -> Result<f64> {
    if !(0.0..=3.0).contains(&alpha) {
        return Err(Error::Domain(format!("J_alpha needs alpha in [0, 3], got {alpha}")));
    }
    Ok(j_radial(norm(v), alpha))
}

/// Gaussian moment `M_α(μ) = ∫ |v|^α μ`.
pub fn moment(alpha: f64) -> f64 {
    j_radial(0.0, alpha)
}

/// Upper bound on `J_α` at `|v| = ρ` in terms of the Gaussian moments
/// `M_2 = 3`, `M_4 = 15`. Items `α = 0` and `α = 2` are identities.
pub fn j_alpha_bound(rho: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=3.0).contains(&alpha) {
        return Err(Error::Domain(format!("J_alpha needs alpha in [0, 3], got {alpha}")));
    }
    let ra = rho.powf(alpha);
    Ok(if alpha == 0.0 {
        1.0
    } else if alpha <= 1.0 {
        ra + moment(alpha)
    } else if alpha < 2.0 {
        ra + M2.powf(alpha / 2.0)
    } else if alpha == 2.0 {
        ra + M2
    } else {
        ra + 10f64.powf(alpha / 4.0) * rho.powf(alpha / 2.0) + M4.powf(alpha / 4.0)
    })
}

/// Eigenvalues `(ℓ1, ℓ2)` of `ā(v)`: along `v` and on `v^⊥`.
pub fn ell(v: &Vec3, k: &CollisionKernel) -> (f64, f64) {
    let rho = norm(v);
    let beta = k.gamma + 4.0;
    (
        radial(Angular::OneMinusT2, rho, beta),
        radial(Angular::HalfOnePlusT2, rho, beta),
    )
}

/// Convolved fields `ā = a*μ`, `b̄ = b*μ`, `c̄ = c*μ` at one velocity.
#[derive(Clone, Copy, Debug)]
pub struct BarFields {
    pub a: Mat3,
    pub b: Vec3,
    pub c: f64,
    pub ell1: f64,
    pub ell2: f64,
}

/// Evaluates `ā, b̄, c̄`. `ā` is assembled from its eigen-decomposition; `b̄` comes
/// from its own quadrature of `−2|w|^γ w` against `μ(v − w)`.
pub fn bar_fields(v: &Vec3, k: &CollisionKernel) -> BarFields {
    let rho = norm(v);
    let (l1, l2) = ell(v, k);
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    if rho == 0.0 {
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = l1;
        }
    } else {
        let e = [v[0] / rho, v[1] / rho, v[2] / rho];
        for i in 0..3 {
            for j in 0..3 {
                let d = if i == j { 1.0 } else { 0.0 };
                a[i][j] = l1 * e[i] * e[j] + l2 * (d - e[i] * e[j]);
            }
        }
        let s = -2.0 * radial(Angular::T, rho, k.gamma + 3.0);
        b = [s * e[0], s * e[1], s * e[2]];
    }
    let c = -2.0 * (k.gamma + 3.0) * j_radial(rho, k.gamma);
    BarFields { a, b, c, ell1: l1, ell2: l2 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(g: f64) -> CollisionKernel {
        CollisionKernel::new(g).unwrap()
    }

    #[test]
    fn gamma_range_is_enforced() {
        assert!(CollisionKernel::new(-0.1).is_err());
        assert!(CollisionKernel::new(1.5).is_err());
        assert!(CollisionKernel::new(0.0).is_ok());
    }

    #[test]
    fn a_on_axis_vectors() {
        let a = eval_a(&[1.0, 0.0, 0.0], &k(1.0));
        let want = [[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(a, want);
        let a = eval_a(&[0.0, 2.0, 0.0], &k(1.0));
        assert!((a[0][0] + a[1][1] + a[2][2] - 16.0).abs() < 1e-12);
        assert_eq!(eval_a(&[0.0; 3], &k(0.3)), [[0.0; 3]; 3]);
    }

    #[test]
    fn a_annihilates_its_argument() {
        let z = [1.0, 2.0, 3.0];
        let a = eval_a(&z, &k(0.5));
        for row in a {
            assert!(dot(&row, &z).abs() < 1e-12);
        }
    }

    #[test]
    fn b_and_c_values() {
        assert_eq!(eval_b(&[1.0, 0.0, 0.0], &k(1.0)), [-2.0, 0.0, 0.0]);
        assert_eq!(eval_b(&[0.0; 3], &k(1.0)), [0.0; 3]);
        assert_eq!(eval_b(&[0.0, 0.0, 2.0], &k(0.0)), [0.0, 0.0, -4.0]);
        assert_eq!(eval_c(&[1.0, 0.0, 0.0], &k(1.0)), -8.0);
        assert_eq!(eval_c(&[0.3, -2.0, 7.0], &k(0.0)), -6.0);
        assert_eq!(eval_c(&[0.0; 3], &k(0.0)), -6.0);
        assert!((eval_c(&[3.0, 4.0, 0.0], &k(1.0)) + 40.0).abs() < 1e-12);
    }

    #[test]
    fn maxwellian_origin() {
        assert!((maxwellian(&[0.0; 3]) - 0.063_493_635_934_240_97).abs() < 1e-15);
    }

    #[test]
    fn gaussian_moments() {
        assert!((moment(0.0) - 1.0).abs() < 1e-12);
        assert!((moment(2.0) - M2).abs() < 1e-9);
        assert!((moment(4.0) - M4).abs() < 1e-9);
        // M_1 = 2 sqrt(2/π) for the chi distribution with three degrees of freedom
        assert!((moment(1.0) - 2.0 * (2.0 / PI).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn j_alpha_respects_moment_bounds() {
        for rho in [0.0, 0.5, 2.0, 7.0] {
            for alpha in [0.0, 0.4, 1.0, 1.5, 2.0, 2.5, 3.0] {
                let j = j_radial(rho, alpha);
                let b = j_alpha_bound(rho, alpha).unwrap();
                assert!(j <= b * (1.0 + 1e-8), "rho={rho} alpha={alpha}: {j} > {b}");
            }
        }
        assert!(j_alpha_bound(1.0, 3.5).is_err());
    }

    #[test]
    fn j_alpha_closed_forms() {
        for rho in [0.0, 0.3, 1.7, 6.0, 25.0] {
            let v = [0.0, rho, 0.0];
            assert_eq!(j_alpha(&v, 0.0).unwrap(), 1.0);
            let j2 = j_alpha(&v, 2.0).unwrap();
            assert!((j2 - rho * rho - 3.0).abs() < 1e-8 * (1.0 + rho * rho), "rho={rho}");
            let j4 = j_radial(rho, 4.0);
            let want = rho.powi(4) + 10.0 * rho * rho + 15.0;
            assert!((j4 - want).abs() < 1e-8 * want);
        }
        assert!(j_alpha(&[0.0; 3], 3.5).is_err());
        assert!(j_alpha(&[0.0; 3], -0.5).is_err());
    }

    #[test]
    fn ell_is_isotropic_at_origin() {
        let (l1, l2) = ell(&[0.0; 3], &k(1.0));
        assert!((l1 - l2).abs() < 1e-10);
        // ā(0) = (2/3) M_{γ+2} I
        assert!((l1 - 2.0 / 3.0 * moment(3.0)).abs() < 1e-9);
    }

    #[test]
    fn ell_far_field() {
        let (l1, l2) = ell(&[10.0, 0.0, 0.0], &k(1.0));
        assert!((16.0..=24.0).contains(&l1), "l1={l1}");
        assert!((800.0..=1200.0).contains(&l2), "l2={l2}");
    }

    #[test]
    fn bar_fields_identities() {
        let kk = k(1.0);
        let v = [2.0, 0.0, 0.0];
        let f = bar_fields(&v, &kk);
        let q: f64 = (0..3).map(|i| (0..3).map(|j| f.a[i][j] * v[i] * v[j]).sum::<f64>()).sum();
        assert!((q - f.ell1 * 4.0).abs() < 1e-10);
        let tr = f.a[0][0] + f.a[1][1] + f.a[2][2];
        assert!((tr - 2.0 * j_radial(2.0, 3.0)).abs() < 1e-8);
        assert!((f.b[0] + f.ell1 * 2.0).abs() < 1e-8);
        assert_eq!(bar_fields(&[0.0; 3], &kk).b, [0.0; 3]);
    }

    #[test]
    fn series_and_closed_forms_agree_at_switch() {
        for kind in [Angular::One, Angular::OneMinusT2, Angular::HalfOnePlusT2, Angular::T] {
            let (rho, r) = (1.0, SERIES_X);
            let a = angular(kind, rho, r * (1.0 - 1e-9));
            let b = angular(kind, rho, r * (1.0 + 1e-9));
            assert!((a - b).abs() < 1e-8 * a.abs());
        }
    }
}
