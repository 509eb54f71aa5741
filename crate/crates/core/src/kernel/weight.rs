//! Weight families `⟨v⟩^k` and `exp(r⟨v⟩^s)`, their abscissas, and the
//! pointwise dissipativity functional `φ_{m,p,θ}`.

use super::{bar_fields, bracket, dot, CollisionKernel, Mat3, Vec3};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    Polynomial { k: f64 },
    StretchedExp { r: f64, s: f64 },
}

/// A weight `m` together with the integrability index `p` of the space `L^p(m)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    kind: WeightKind,
    p: f64,
}

impl Weight {
    /// Validates the admissibility conditions for the given kernel.
    pub fn new(kind: WeightKind, p: f64, kernel: &CollisionKernel) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidParam(format!("p = {p} must lie in [1, inf)")));
        }
        match kind {
            WeightKind::Polynomial { k } => {
                let min = kernel.gamma() + 2.0 + 3.0 * (1.0 - 1.0 / p);
                if !(k > min) {
                    return Err(Error::InvalidParam(format!(
                        "polynomial weight needs k > {min}, got k = {k}"
                    )));
                }
            }
            WeightKind::StretchedExp { r, s } => {
                if !(s > 0.0 && s <= 2.0) {
                    return Err(Error::InvalidParam(format!("exponent s = {s} outside (0, 2]")));
                }
                if !(r > 0.0) {
                    return Err(Error::InvalidParam(format!("rate r = {r} must be positive")));
                }
                if s == 2.0 && !(r < 1.0 / (2.0 * p)) {
                    return Err(Error::InvalidParam(format!(
                        "Gaussian weight needs r < 1/(2p) = {}, got r = {r}",
                        1.0 / (2.0 * p)
                    )));
                }
            }
        }
        Ok(Self { kind, p })
    }

    pub fn polynomial(k: f64, p: f64, kernel: &CollisionKernel) -> Result<Self> {
        Self::new(WeightKind::Polynomial { k }, p, kernel)
    }

    pub fn stretched_exp(r: f64, s: f64, p: f64, kernel: &CollisionKernel) -> Result<Self> {
        Self::new(WeightKind::StretchedExp { r, s }, p, kernel)
    }

    /// Reference weight `m0 = exp(r⟨v⟩²)` with `r ∈ (0, 1/4)`, used with `p = 2`.
    pub fn m0(r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 0.25) {
            return Err(Error::InvalidParam(format!("m0 needs r in (0, 1/4), got {r}")));
        }
        Ok(Self { kind: WeightKind::StretchedExp { r, s: 2.0 }, p: 2.0 })
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `ln m(v)`.
    pub fn log_value(&self, v: &Vec3) -> f64 {
        let b = bracket(v);
        match self.kind {
            WeightKind::Polynomial { k } => k * b.ln(),
            WeightKind::StretchedExp { r, s } => r * b.powf(s),
        }
    }

    /// `∇m/m`.
    pub fn grad_log(&self, v: &Vec3) -> Vec3 {
        let b2 = 1.0 + dot(v, v);
        let f = match self.kind {
            WeightKind::Polynomial { k } => k / b2,
            WeightKind::StretchedExp { r, s } => r * s * b2.powf(0.5 * s - 1.0),
        };
        [f * v[0], f * v[1], f * v[2]]
    }

    /// `∂_ij m / m`.
    pub fn hess_over_m(&self, v: &Vec3) -> Mat3 {
        let b2 = 1.0 + dot(v, v);
        let (diag, outer) = match self.kind {
            WeightKind::Polynomial { k } => (k / b2, k * (k - 2.0) / (b2 * b2)),
            WeightKind::StretchedExp { r, s } => (
                r * s * b2.powf(0.5 * s - 1.0),
                r * s * (s - 2.0) * b2.powf(0.5 * s - 2.0) + r * r * s * s * b2.powf(s - 2.0),
            ),
        };
        let mut h = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                h[i][j] = outer * v[i] * v[j] + if i == j { diag } else { 0.0 };
            }
        }
        h
    }
}

/// `m(v)`: `⟨v⟩^k` or `exp(r⟨v⟩^s)`.
pub fn weight_value(w: &Weight, v: &Vec3) -> f64 {
    w.log_value(v).exp()
}

/// Abscissa `a_{m,p}`; finite only for polynomial weights with `γ = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Abscissa {
    Finite(f64),
    UnboundedBelow,
}

impl Abscissa {
    /// Whether `a` lies strictly above the abscissa.
    pub fn admits(&self, a: f64) -> bool {
        match self {
            Abscissa::Finite(x) => a > *x,
            Abscissa::UnboundedBelow => a.is_finite(),
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Abscissa::Finite(x) => Some(*x),
            Abscissa::UnboundedBelow => None,
        }
    }
}

pub fn abscissa(w: &Weight, k: &CollisionKernel) -> Abscissa {
    match w.kind {
        WeightKind::Polynomial { k: kk } if k.gamma() == 0.0 => {
            Abscissa::Finite(2.0 * (3.0 * (1.0 - 1.0 / w.p) - kk))
        }
        _ => Abscissa::UnboundedBelow,
    }
}

/// `(θ, δ1, δ2)` for a given integrability index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiParams {
    pub theta: f64,
    pub delta1: f64,
    pub delta2: f64,
    p: f64,
}

impl PhiParams {
    pub fn new(theta: f64, p: f64) -> Self {
        let delta1 = 1.0 - 2.0 * theta * (1.0 - 1.0 / p);
        let delta2 = delta1 * (p * (1.0 - theta) - 1.0) + theta * (p - theta * (p - 1.0));
        Self { theta, delta1, delta2, p }
    }

    /// The choice made in the dissipativity argument: `θ = p/(2(p−1))` for
    /// polynomial weights with `p > 1`, `θ = 0` otherwise.
    pub fn standard(w: &Weight) -> Self {
        let theta = match w.kind {
            WeightKind::Polynomial { .. } if w.p > 1.0 => w.p / (2.0 * (w.p - 1.0)),
            _ => 0.0,
        };
        Self::new(theta, w.p)
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// `φ_{m,p,θ}(v) = δ1 ā_ij ∂_ij m/m + δ2 ā_ij ∂_i m ∂_j m/m² + (1+δ1) b̄·∇m/m + (1/p − 1) c̄`.
pub fn phi(w: &Weight, params: &PhiParams, v: &Vec3, k: &CollisionKernel) -> f64 {
    debug_assert!((params.p - w.p).abs() < 1e-14, "PhiParams built for another p");
    let bar = bar_fields(v, k);
    let g = w.grad_log(v);
    let h = w.hess_over_m(v);
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            t1 += bar.a[i][j] * h[i][j];
            t2 += bar.a[i][j] * g[i] * g[j];
        }
    }
    params.delta1 * t1 + params.delta2 * t2 + (1.0 + params.delta1) * dot(&bar.b, &g)
        + (1.0 / w.p - 1.0) * bar.c
}

/// Leading far-field behaviour of `φ` under [`PhiParams::standard`].
pub fn phi_far_field(w: &Weight, k: &CollisionKernel, v: &Vec3) -> f64 {
    let b = bracket(v);
    let g = k.gamma();
    let p = w.p;
    match w.kind {
        WeightKind::Polynomial { k: kk } if p > 1.0 => {
            -2.0 * (kk - (g + 3.0) * (1.0 - 1.0 / p)) * b.powf(g)
        }
        WeightKind::Polynomial { k: kk } => -2.0 * kk * b.powf(g),
        WeightKind::StretchedExp { r, s } if s < 2.0 => -2.0 * r * s * b.powf(s + g),
        WeightKind::StretchedExp { r, .. } => 4.0 * r * (2.0 * p * r - 1.0) * b.powf(g + 2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{ell, j_radial, norm};

    fn kern(g: f64) -> CollisionKernel {
        CollisionKernel::new(g).unwrap()
    }

    #[test]
    fn admissibility() {
        let k1 = kern(1.0);
        assert!(Weight::polynomial(5.0, 1.0, &k1).is_ok());
        assert!(Weight::polynomial(3.0, 1.0, &k1).is_err());
        assert!(Weight::polynomial(4.4, 2.0, &k1).is_err());
        assert!(Weight::stretched_exp(0.25, 2.0, 2.0, &k1).is_err());
        assert!(Weight::stretched_exp(0.3, 2.0, 2.0, &k1).is_err());
        assert!(Weight::stretched_exp(0.2, 2.0, 1.0, &k1).is_ok());
        assert!(Weight::stretched_exp(1.0, 2.5, 1.0, &k1).is_err());
        assert!(Weight::stretched_exp(-1.0, 1.0, 1.0, &k1).is_err());
        assert!(Weight::m0(0.25).is_err());
        assert!(Weight::m0(0.1).is_ok());
        assert!(Weight::polynomial(5.0, 0.5, &k1).is_err());
    }

    #[test]
    fn abscissa_cases() {
        let w = Weight::polynomial(5.0, 1.0, &kern(0.0)).unwrap();
        assert_eq!(abscissa(&w, &kern(0.0)), Abscissa::Finite(-10.0));
        let w = Weight::polynomial(6.0, 2.0, &kern(1.0)).unwrap();
        assert_eq!(abscissa(&w, &kern(1.0)), Abscissa::UnboundedBelow);
        let w = Weight::stretched_exp(0.5, 1.0, 1.0, &kern(0.0)).unwrap();
        assert_eq!(abscissa(&w, &kern(0.0)), Abscissa::UnboundedBelow);
        assert!(Abscissa::Finite(-10.0).admits(-9.5));
        assert!(!Abscissa::Finite(-10.0).admits(-10.5));
        assert!(Abscissa::UnboundedBelow.admits(-1e9));
    }

    #[test]
    fn weight_values() {
        let k1 = kern(1.0);
        let w = Weight::polynomial(5.0, 1.0, &k1).unwrap();
        assert!((weight_value(&w, &[1.0, 1.0, 1.0]) - 32.0).abs() < 1e-12);
        let w = Weight::m0(0.1).unwrap();
        assert!((weight_value(&w, &[0.0, 0.0, 3.0]) - (1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn log_derivatives_match_finite_differences() {
        let k1 = kern(1.0);
        let ws = [
            Weight::polynomial(5.5, 2.0, &k1).unwrap(),
            Weight::stretched_exp(0.7, 1.3, 1.0, &k1).unwrap(),
        ];
        let v = [0.4, -1.1, 0.8];
        let e = 1e-4;
        for w in ws {
            let g = w.grad_log(&v);
            let h = w.hess_over_m(&v);
            let m = |x: &Vec3| weight_value(&w, x);
            let m0 = m(&v);
            for i in 0..3 {
                let mut vp = v;
                let mut vm = v;
                vp[i] += e;
                vm[i] -= e;
                let d = (m(&vp) - m(&vm)) / (2.0 * e) / m0;
                assert!((d - g[i]).abs() < 1e-7);
                for j in 0..3 {
                    let shift = |a: f64, b: f64| {
                        let mut x = v;
                        x[i] += a;
                        x[j] += b;
                        m(&x)
                    };
                    let d2 = (shift(e, e) - shift(e, -e) - shift(-e, e) + shift(-e, -e))
                        / (4.0 * e * e)
                        / m0;
                    assert!((d2 - h[i][j]).abs() < 1e-5, "{i}{j}: {d2} vs {}", h[i][j]);
                }
            }
        }
    }

    #[test]
    fn delta_values() {
        let pp = PhiParams::new(1.0, 2.0);
        assert!(pp.delta1.abs() < 1e-15 && (pp.delta2 - 1.0).abs() < 1e-15);
        for theta in [0.0, 0.3, 2.0] {
            let pp = PhiParams::new(theta, 1.0);
            assert!((pp.delta1 - 1.0).abs() < 1e-15 && pp.delta2.abs() < 1e-15);
        }
        let p = 3.0;
        let pp = PhiParams::new(p / (2.0 * (p - 1.0)), p);
        assert!(pp.delta1.abs() < 1e-14);
        assert!((pp.delta2 - p * p / (4.0 * (p - 1.0))).abs() < 1e-14);
        let pp = PhiParams::new(0.0, p);
        assert!((pp.delta1 - 1.0).abs() < 1e-15 && (pp.delta2 - (p - 1.0)).abs() < 1e-15);
    }

    // Polynomial weight, p > 1, θ = p/(2(p−1)): three-term reduction.
    #[test]
    fn polynomial_reduction_p_gt_1() {
        let k = kern(1.0);
        let (kk, p) = (6.0, 2.0);
        let w = Weight::polynomial(kk, p, &k).unwrap();
        let pp = PhiParams::standard(&w);
        for v in [[0.5, 0.0, 0.0], [1.0, 2.0, -0.5], [0.0, 7.0, 3.0]] {
            let r2 = dot(&v, &v);
            let b2 = 1.0 + r2;
            let (l1, _) = ell(&v, &k);
            let jg = j_radial(norm(&v), k.gamma());
            let red = p * p / (4.0 * (p - 1.0)) * kk * kk * l1 * r2 / (b2 * b2) - kk * l1 * r2 / b2
                + 2.0 * (k.gamma() + 3.0) * (1.0 - 1.0 / p) * jg;
            let full = phi(&w, &pp, &v, &k);
            assert!((full - red).abs() < 1e-8 * (1.0 + red.abs()), "{full} vs {red}");
        }
    }

    // Polynomial weight, p = 1.
    #[test]
    fn polynomial_reduction_p_eq_1() {
        let k = kern(0.5);
        let kk = 5.0;
        let w = Weight::polynomial(kk, 1.0, &k).unwrap();
        let pp = PhiParams::new(0.7, 1.0);
        for v in [[0.0, 0.0, 0.0], [1.5, -0.5, 0.2], [9.0, 0.0, 0.0]] {
            let r2 = dot(&v, &v);
            let b2 = 1.0 + r2;
            let (l1, _) = ell(&v, &k);
            let j = j_radial(norm(&v), k.gamma() + 2.0);
            let red = 2.0 * kk * j / b2 + kk * (kk - 2.0) * l1 * r2 / (b2 * b2) - 2.0 * kk * l1 * r2 / b2;
            let full = phi(&w, &pp, &v, &k);
            assert!((full - red).abs() < 1e-8 * (1.0 + red.abs()));
        }
    }

    // Stretched exponential with θ = 0: five-term reduction.
    #[test]
    fn stretched_exp_reduction() {
        let k = kern(1.0);
        for (r, s, p) in [(1.0, 1.0, 2.0), (0.2, 2.0, 2.0), (0.5, 0.5, 1.0)] {
            let w = Weight::stretched_exp(r, s, p, &k).unwrap();
            let pp = PhiParams::new(0.0, p);
            for v in [[0.3, 0.1, 0.0], [2.0, 2.0, 1.0], [0.0, 0.0, 12.0]] {
                let r2 = dot(&v, &v);
                let b = (1.0 + r2).sqrt();
                let rho = norm(&v);
                let (l1, _) = ell(&v, &k);
                let g = k.gamma();
                let red = 2.0 * r * s * j_radial(rho, g + 2.0) * b.powf(s - 2.0)
                    + r * s * (s - 2.0) * l1 * r2 * b.powf(s - 4.0)
                    + p * r * r * s * s * l1 * r2 * b.powf(2.0 * s - 4.0)
                    - 2.0 * r * s * l1 * r2 * b.powf(s - 2.0)
                    + 2.0 * (g + 3.0) * (1.0 - 1.0 / p) * j_radial(rho, g);
                let full = phi(&w, &pp, &v, &k);
                assert!((full - red).abs() < 1e-8 * (1.0 + red.abs()), "{full} vs {red}");
            }
        }
    }
}
