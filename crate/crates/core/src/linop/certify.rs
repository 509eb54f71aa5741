//! Pointwise certification of `φ_{m,p,θ} − M χ_R ≤ a` and the search for a
//! cutoff `(M, R)` that achieves it.

use super::{chi, LinearisedOperator, SplitParams};
use crate::error::{Error, Result};
use crate::kernel::{abscissa, phi, PhiParams, Weight};
use serde::{Deserialize, Serialize};

/// `φ` sampled at one radius (it is rotation invariant).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProbe {
    pub radius: f64,
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Whether the operator's own split passes.
    pub ok: bool,
    /// `max_v [φ − M χ_R] − a` for the operator's split.
    pub worst_margin: f64,
    pub worst_radius: f64,
    pub target: f64,
    pub tested: SplitParams,
    /// Smallest passing ladder pair: smallest `M` first, then smallest `R`.
    pub suggested: Option<SplitParams>,
    pub probes: Vec<RadialProbe>,
}

/// Radial probe points beyond the grid, out to `4·vmax`.
const FAR_PROBES: usize = 400;
/// Ratio of the `R` ladder.
const R_RATIO: f64 = 1.25;
/// `M` ladder: `0` and `2^{i/2}` for `i = 0..=M_STEPS`.
const M_STEPS: i32 = 80;

fn margin(probes: &[RadialProbe], split: &SplitParams, a: f64) -> (f64, f64) {
    probes
        .iter()
        .map(|p| (p.phi - split.m() * chi(p.radius / split.r()) - a, p.radius))
        .fold((f64::NEG_INFINITY, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc })
}

/// Probes `φ` at every distinct node radius of the grid and on a uniform
/// radial line out to `4·vmax`, then certifies the operator's split and, if
/// it fails, searches the `(M, R)` ladder.
pub fn certify_split(op: &LinearisedOperator, w: &Weight, params: &PhiParams, a: f64) -> Result<Certificate> {
    let k = op.kernel();
    if !abscissa(w, k).admits(a) {
        return Err(Error::Domain(format!("target a = {a} is not above the abscissa {:?}", abscissa(w, k))));
    }
    let grid = op.grid();
    let mut radii: Vec<f64> = (0..grid.len())
        .map(|i| {
            let v = grid.node(i);
            (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
        })
        .collect();
    let far = 4.0 * grid.vmax();
    radii.extend((0..=FAR_PROBES).map(|j| far * j as f64 / FAR_PROBES as f64));
    radii.sort_by(|x, y| x.partial_cmp(y).expect("finite radius"));
    radii.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
    let probes: Vec<RadialProbe> =
        radii.iter().map(|&r| RadialProbe { radius: r, phi: phi(w, params, &[r, 0.0, 0.0], k) }).collect();

    let tested = *op.split();
    let (worst_margin, worst_radius) = margin(&probes, &tested, a);
    let ok = worst_margin <= 0.0;
    let suggested = if ok { Some(tested) } else { search(&probes, a, far) };
    Ok(Certificate { ok, worst_margin, worst_radius, target: a, tested, suggested, probes })
}

fn search(probes: &[RadialProbe], a: f64, far: f64) -> Option<SplitParams> {
    let m_ladder: Vec<f64> =
        std::iter::once(0.0).chain((0..=M_STEPS).map(|i| 2f64.powf(i as f64 / 2.0))).collect();
    let mut r_ladder = vec![1.0];
    while 2.0 * r_ladder.last().expect("nonempty") * R_RATIO <= far {
        let next = r_ladder.last().expect("nonempty") * R_RATIO;
        r_ladder.push(next);
    }
    // the margin is nonincreasing in both M and R, so the smallest passing M
    // is found at the largest R, and the smallest R for that M by a scan
    let passes = |m: f64, r: f64| margin(probes, &SplitParams { m, r }, a).0 <= 0.0;
    let r_max = *r_ladder.last().expect("nonempty ladder");
    if !passes(*m_ladder.last().expect("nonempty ladder"), r_max) {
        return None;
    }
    let (mut lo, mut hi) = (0usize, m_ladder.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if passes(m_ladder[mid], r_max) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let m = m_ladder[lo];
    r_ladder.into_iter().find(|&r| passes(m, r)).map(|r| SplitParams { m, r })
}

/// `max(abscissa + 0.5, −2·λ0)`, the default target for the split.
pub fn default_target(op: &LinearisedOperator, w: &Weight, lambda0: f64) -> f64 {
    let floor = -2.0 * lambda0;
    match abscissa(w, op.kernel()).finite() {
        Some(x) => (x + 0.5).max(floor),
        None => floor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::CollisionKernel;
    use crate::vgrid::VelocityGrid;

    fn op(gamma: f64) -> LinearisedOperator {
        let g = VelocityGrid::new(8, 6.0).unwrap();
        LinearisedOperator::new(g, CollisionKernel::new(gamma).unwrap(), SplitParams::none()).unwrap()
    }

    #[test]
    fn polynomial_weight_needs_a_cutoff() {
        let o = op(1.0);
        let w = Weight::polynomial(5.0, 1.0, o.kernel()).unwrap();
        let pp = PhiParams::standard(&w);
        let c = certify_split(&o, &w, &pp, -1.0).unwrap();
        assert!(!c.ok && c.worst_margin > 0.0);
        let s = c.suggested.unwrap();
        let o2 = o.with_split(s);
        let c2 = certify_split(&o2, &w, &pp, -1.0).unwrap();
        assert!(c2.ok);
    }

    #[test]
    fn maxwell_molecules_respect_the_abscissa() {
        let o = op(0.0);
        let w = Weight::polynomial(5.0, 1.0, o.kernel()).unwrap();
        let pp = PhiParams::standard(&w);
        let c = certify_split(&o, &w, &pp, -9.5).unwrap();
        assert!(c.suggested.is_some());
        assert!(matches!(certify_split(&o, &w, &pp, -10.5), Err(Error::Domain(_))));
    }
}
