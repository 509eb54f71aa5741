//! Weighted `L^p(m)` norms on the grid and discrete Sobolev seminorms.

use crate::error::{Error, Result};
use crate::kernel::{bracket, dot, Vec3, Weight, WeightKind};
use crate::vgrid::diff::{apply_axis, Stencil};
use crate::vgrid::{second_derivative, GridField};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Weight part of a [`NormSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormWeight {
    Plain,
    /// `μ^{-1/2}`, the Hilbert-space weight.
    MuInvHalf,
    /// `⟨v⟩^k`.
    Polynomial { k: f64 },
    /// `exp(r⟨v⟩^s)`.
    StretchedExp { r: f64, s: f64 },
}

impl From<WeightKind> for NormWeight {
    fn from(k: WeightKind) -> Self {
        match k {
            WeightKind::Polynomial { k } => NormWeight::Polynomial { k },
            WeightKind::StretchedExp { r, s } => NormWeight::StretchedExp { r, s },
        }
    }
}

/// `‖·‖_{L^p(m)}` with `p ∈ [1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    p: f64,
    weight: NormWeight,
    /// Extra factor `⟨v⟩^shift` multiplying the weight.
    #[serde(default)]
    shift: f64,
}

const LOG_BIG: f64 = 690.7755278982137; // ln(1e300)

impl NormSpec {
    pub fn new(p: f64, weight: NormWeight) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::InvalidParam(format!("norm exponent p = {p} must be >= 1")));
        }
        match weight {
            NormWeight::Polynomial { k } if !k.is_finite() => {
                return Err(Error::InvalidParam(format!("weight exponent k = {k}")));
            }
            NormWeight::StretchedExp { r, s } if !(r.is_finite() && s > 0.0 && s <= 2.0) => {
                return Err(Error::InvalidParam(format!("weight exp({r}<v>^{s}) not admissible")));
            }
            _ => {}
        }
        Ok(Self { p, weight, shift: 0.0 })
    }

    /// Same `p` and weight as an admissible [`Weight`].
    pub fn from_weight(w: &Weight) -> Self {
        Self { p: w.p(), weight: w.kind().into(), shift: 0.0 }
    }

    pub fn plain(p: f64) -> Result<Self> {
        Self::new(p, NormWeight::Plain)
    }

    /// `L¹(⟨v⟩^k)`.
    pub fn l1_poly(k: f64) -> Result<Self> {
        Self::new(1.0, NormWeight::Polynomial { k })
    }

    /// `L²(μ^{-1/2})`.
    pub fn hilbert() -> Self {
        Self { p: 2.0, weight: NormWeight::MuInvHalf, shift: 0.0 }
    }

    /// The same norm with the weight multiplied by `⟨v⟩^k`.
    pub fn with_bracket(mut self, k: f64) -> Self {
        self.shift += k;
        self
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn weight(&self) -> NormWeight {
        self.weight
    }

    /// Stable text label, used as a column name and series key.
    pub fn tag(&self) -> String {
        let p = if self.p.is_infinite() { "inf".to_string() } else { format!("{}", self.p) };
        let w = match self.weight {
            NormWeight::Plain => "1".to_string(),
            NormWeight::MuInvHalf => "mu^-1/2".to_string(),
            NormWeight::Polynomial { k } => format!("<v>^{k}"),
            NormWeight::StretchedExp { r, s } => format!("exp({r}<v>^{s})"),
        };
        if self.shift != 0.0 {
            format!("L{p}({w}<v>^{})", self.shift)
        } else {
            format!("L{p}({w})")
        }
    }

    /// `ln m(v)`.
    pub fn log_weight(&self, v: &Vec3) -> f64 {
        let extra = if self.shift != 0.0 { self.shift * bracket(v).ln() } else { 0.0 };
        extra + match self.weight {
            NormWeight::Plain => 0.0,
            NormWeight::MuInvHalf => 0.25 * dot(v, v) + 0.75 * (2.0 * PI).ln(),
            NormWeight::Polynomial { k } => k * bracket(v).ln(),
            NormWeight::StretchedExp { r, s } => r * bracket(v).powf(s),
        }
    }
}

/// `‖m f‖_{L^p}` by midpoint quadrature; `p = ∞` takes the max over nodes.
///
/// Switches to log-space accumulation when the weight exceeds `1e300` on the
/// grid. Fails if the norm itself is not representable.
pub fn norm(f: &GridField, spec: &NormSpec) -> Result<f64> {
    let grid = f.grid();
    let lw: Vec<f64> = (0..grid.len()).map(|i| spec.log_weight(&grid.node(i))).collect();
    let max_lw = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let p = spec.p;
    let out = if max_lw <= LOG_BIG {
        let w = lw.iter().map(|x| x.exp());
        if p.is_infinite() {
            f.data().iter().zip(w).fold(0.0f64, |m, (x, w)| m.max((x * w).abs()))
        } else if p == 1.0 {
            f.data().iter().zip(w).map(|(x, w)| (x * w).abs()).sum::<f64>() * grid.cell()
        } else {
            let s: f64 = f.data().iter().zip(w).map(|(x, w)| (x * w).abs().powf(p)).sum();
            (s * grid.cell()).powf(1.0 / p)
        }
    } else {
        log_space_norm(f.data(), &lw, p, grid.cell())
    };
    if !out.is_finite() {
        return Err(Error::NonFinite(format!("{} norm overflows", spec.tag())));
    }
    Ok(out)
}

fn log_space_norm(f: &[f64], lw: &[f64], p: f64, cell: f64) -> f64 {
    let t: Vec<f64> =
        f.iter().zip(lw).map(|(x, w)| if *x == 0.0 { f64::NEG_INFINITY } else { w + x.abs().ln() }).collect();
    let top = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return 0.0;
    }
    if p.is_infinite() {
        return top.exp();
    }
    let s: f64 = t.iter().map(|x| (p * (x - top)).exp()).sum();
    (top + (s * cell).ln() / p).exp()
}

/// `Σ_i ‖m ∂_i f‖` (order 1) or `Σ_{ij} ‖m ∂_ij f‖` (order 2), with the
/// fourth-order stencils of [`second_derivative`].
pub fn sobolev_seminorm(f: &GridField, spec: &NormSpec, order: usize) -> Result<f64> {
    let g = *f.grid();
    match order {
        1 => (0..3)
            .map(|i| {
                let d = apply_axis(&g, f.data(), i, Stencil::D1OneSided);
                norm(&GridField::from_vec_unchecked(g, d), spec)
            })
            .sum(),
        2 => {
            let mut total = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    total += norm(&second_derivative(f, i, j)?, spec)?;
                }
            }
            Ok(total)
        }
        _ => Err(Error::InvalidParam(format!("Sobolev order {order} not in {{1, 2}}"))),
    }
}

/// `‖f‖_{L^p(m)} + Σ_{1≤j≤s} |f|_{W^{j,p}(m)}`.
pub fn sobolev_norm(f: &GridField, spec: &NormSpec, order: usize) -> Result<f64> {
    let mut total = norm(f, spec)?;
    for j in 1..=order {
        total += sobolev_seminorm(f, spec, j)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vgrid::VelocityGrid;

    fn grid() -> VelocityGrid {
        VelocityGrid::new(24, 7.0).unwrap()
    }

    #[test]
    fn maxwellian_norms() {
        let mu = GridField::maxwellian(grid());
        assert!((norm(&mu, &NormSpec::plain(1.0).unwrap()).unwrap() - 1.0).abs() < 1e-6);
        assert!((norm(&mu, &NormSpec::hilbert()).unwrap() - 1.0).abs() < 1e-6);
        let sup = norm(&mu, &NormSpec::plain(f64::INFINITY).unwrap()).unwrap();
        assert!(sup < (2.0 * PI).powf(-1.5) && sup > 0.8 * (2.0 * PI).powf(-1.5));
    }

    #[test]
    fn log_space_agrees_with_direct() {
        let g = grid();
        let f = GridField::from_fn(g, |v| (-dot(v, v)).exp());
        let spec = NormSpec::new(2.0, NormWeight::StretchedExp { r: 0.3, s: 2.0 }).unwrap();
        let lw: Vec<f64> = (0..g.len()).map(|i| spec.log_weight(&g.node(i))).collect();
        let direct = norm(&f, &spec).unwrap();
        let logged = log_space_norm(f.data(), &lw, 2.0, g.cell());
        assert!((direct - logged).abs() < 1e-12 * direct);
    }

    #[test]
    fn huge_weights_use_log_space() {
        let g = VelocityGrid::new(16, 29.0).unwrap();
        let f = GridField::from_fn(g, |v| (-1.2 * dot(v, v)).exp());
        let spec = NormSpec::new(1.0, NormWeight::StretchedExp { r: 1.0, s: 2.0 }).unwrap();
        let x = norm(&f, &spec).unwrap();
        assert!(x.is_finite() && x > 0.0);
        let bad = GridField::from_fn(g, |_| 1.0);
        assert!(norm(&bad, &spec).is_err());
    }

    #[test]
    fn tags_and_validation() {
        assert_eq!(NormSpec::l1_poly(5.0).unwrap().tag(), "L1(<v>^5)");
        assert_eq!(NormSpec::hilbert().tag(), "L2(mu^-1/2)");
        assert!(NormSpec::plain(0.5).is_err());
        assert!(NormSpec::new(1.0, NormWeight::StretchedExp { r: 1.0, s: 3.0 }).is_err());
    }

    #[test]
    fn sobolev_of_maxwellian() {
        let mu = GridField::maxwellian(grid());
        let spec = NormSpec::plain(2.0).unwrap();
        let h1 = sobolev_seminorm(&mu, &spec, 1).unwrap();
        // ‖∂_i μ‖_{L²}² = ∫ v_i² μ² = 1 / (2 (4π)^{3/2})
        let exact = 3.0 * (0.5 / (4.0 * PI).powf(1.5)).sqrt();
        assert!((h1 - exact).abs() < 2e-2 * exact);
        assert!(sobolev_seminorm(&mu, &spec, 3).is_err());
    }
}
