//! The bilinear collision operator `Q(g,f) = (a_ij*g) ∂_ij f − (c*g) f`, the
//! nonlinear flow `∂_t f = Q(f,f)`, and its conservation and entropy
//! bookkeeping.
//!
//! `Q` is corrected by the moment projection so that it conserves mass,
//! momentum and energy exactly on the grid. The flow is integrated in
//! perturbative form `∂_t h = L h + Q(h,h)` with `f = μ + h`, so the discrete
//! Maxwellian is an exact steady state.

mod checks;

pub use checks::{bilinear_estimate_check, ckp_check, duhamel_residual, CkpReport};

use crate::diagnostics::fit::TimeSeries;
use crate::diagnostics::norm::{norm, sobolev_norm, NormSpec};
use crate::error::{Error, Result};
use crate::kernel::CollisionKernel;
use crate::linop::{LinearisedOperator, SplitParams};
use crate::vgrid::diff::PAIR_MULT;
use crate::vgrid::{GridField, VelocityGrid};
use serde::{Deserialize, Serialize};

/// Time step choice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSize {
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub t_end: f64,
    pub dt: StepSize,
    /// Perturbation amplitude for `f0 = μ + eps·g` set-ups.
    pub eps: f64,
    /// Restore the initial mass, momentum and energy after every step.
    pub conserve_project: bool,
    /// Positivity floor inside logarithms, relative to `max f`.
    pub floor: f64,
    /// Number of output intervals on `[0, t_end]`.
    pub outputs: usize,
    /// Norms of `f_t − μ` to record.
    pub norms: Vec<NormSpec>,
    /// Norms of `f_t` itself to record.
    pub f_norms: Vec<NormSpec>,
    /// Record discrete `H¹`, `H²` norms of `f_t − μ`.
    pub sobolev_monitor: bool,
    /// Keep `f_t − μ` at every output time.
    pub keep_snapshots: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            dt: StepSize::Auto,
            eps: 0.1,
            conserve_project: true,
            floor: 1e-30,
            outputs: 100,
            norms: vec![NormSpec::plain(1.0).expect("p = 1")],
            f_norms: Vec::new(),
            sobolev_monitor: false,
            keep_snapshots: false,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParam(format!("t_end = {} must be positive", self.t_end)));
        }
        if let StepSize::Fixed(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(Error::InvalidParam(format!("dt = {dt} must be positive")));
            }
        }
        if !(self.eps >= 0.0) {
            return Err(Error::InvalidParam(format!("eps = {} must be >= 0", self.eps)));
        }
        if !(self.floor > 0.0) {
            return Err(Error::InvalidParam(format!("floor = {} must be > 0", self.floor)));
        }
        if self.outputs == 0 {
            return Err(Error::InvalidParam("outputs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Observables recorded along a nonlinear run.
#[derive(Clone, Debug, Default)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub momentum: Vec<[f64; 3]>,
    pub energy: Vec<f64>,
    pub entropy: Vec<f64>,
    pub relative_entropy: Vec<f64>,
    pub dissipation: Vec<f64>,
    pub boundary_mass: Vec<f64>,
    /// `(tag, values)` for norms of `f_t − μ`, then of `f_t` (tags prefixed `f:`),
    /// then the Sobolev monitors.
    pub norms: Vec<(String, Vec<f64>)>,
    pub snapshots: Vec<GridField>,
    pub final_state: Option<GridField>,
    pub dt: f64,
    pub steps: usize,
    /// First output time with `min f < −1e−8 max f`, and that minimum.
    pub negativity: Option<(f64, f64)>,
}

impl TimeSeries for EvolutionTrace {
    fn times(&self) -> &[f64] {
        &self.times
    }

    fn series(&self, tag: &str) -> Option<&[f64]> {
        match tag {
            "mass" => Some(&self.mass),
            "energy" => Some(&self.energy),
            "H" => Some(&self.entropy),
            "Hrel" => Some(&self.relative_entropy),
            "D" => Some(&self.dissipation),
            "boundary" => Some(&self.boundary_mass),
            _ => self.norms.iter().find(|(t, _)| t == tag).map(|(_, v)| v.as_slice()),
        }
    }
}

impl EvolutionTrace {
    /// One CSV row per output time.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,mass,ux,uy,uz,energy,H,Hrel,D");
        for (tag, _) in &self.norms {
            s.push(',');
            s.push_str(tag);
        }
        s.push('\n');
        for i in 0..self.times.len() {
            let m = self.momentum[i];
            s.push_str(&format!(
                "{:.10e},{:.15e},{:.6e},{:.6e},{:.6e},{:.15e},{:.15e},{:.10e},{:.10e}",
                self.times[i],
                self.mass[i],
                m[0],
                m[1],
                m[2],
                self.energy[i],
                self.entropy[i],
                self.relative_entropy[i],
                self.dissipation[i]
            ));
            for (_, v) in &self.norms {
                s.push_str(&format!(",{:.10e}", v[i]));
            }
            s.push('\n');
        }
        s
    }

    /// Largest relative drift of mass, momentum and energy from their initial values.
    pub fn conservation_drift(&self) -> f64 {
        let (m0, e0, p0) = (self.mass[0], self.energy[0], self.momentum[0]);
        let mut worst: f64 = 0.0;
        for i in 0..self.times.len() {
            worst = worst.max(((self.mass[i] - m0) / m0).abs());
            worst = worst.max(((self.energy[i] - e0) / e0).abs());
            for a in 0..3 {
                worst = worst.max((self.momentum[i][a] - p0[a]).abs() / m0);
            }
        }
        worst
    }
}

/// Cached convolution and derivative machinery for `Q` on one grid.
#[derive(Clone, Debug)]
pub struct CollisionOperator {
    lin: LinearisedOperator,
}

impl CollisionOperator {
    pub fn new(grid: VelocityGrid, kernel: CollisionKernel) -> Result<Self> {
        Ok(Self { lin: LinearisedOperator::new(grid, kernel, SplitParams::none())? })
    }

    pub fn from_linear(op: &LinearisedOperator) -> Self {
        Self { lin: op.clone().with_split(SplitParams::none()) }
    }

    pub fn grid(&self) -> &VelocityGrid {
        self.lin.grid()
    }

    pub fn kernel(&self) -> &CollisionKernel {
        self.lin.kernel()
    }

    pub fn linear(&self) -> &LinearisedOperator {
        &self.lin
    }

    /// `(a_ij*g) ∂_ij f − (c*g) f` before the moment correction.
    fn q_raw(&self, g: &[f64], f: &[f64]) -> Vec<f64> {
        let cg = self.lin.convolver().convolve_all(g);
        let df = self.lin.derivatives().apply(f);
        let mut out: Vec<f64> = cg.c.iter().zip(f).map(|(c, x)| -c * x).collect();
        for q in 0..6 {
            let w = PAIR_MULT[q];
            for ((o, a), d) in out.iter_mut().zip(&cg.a[q]).zip(&df[q]) {
                *o += w * a * d;
            }
        }
        out
    }

    /// `Q(g,f) − ½ Π[Q(g,f) + Q(f,g)]`; reduces to `(I − Π) Q(f,f)` on the diagonal.
    pub fn apply(&self, g: &GridField, f: &GridField) -> Result<GridField> {
        if g.grid() != self.grid() || f.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        let proj = self.lin.projector();
        let mut out = self.q_raw(g.data(), f.data());
        let mut sym = out.clone();
        if g.data() != f.data() {
            for (s, x) in sym.iter_mut().zip(self.q_raw(f.data(), g.data())) {
                *s += x;
            }
        } else {
            sym.iter_mut().for_each(|x| *x *= 2.0);
        }
        let c = proj.solve(proj.moments(&sym));
        proj.add_combination(&mut out, c.map(|x| -0.5 * x));
        Ok(GridField::from_vec_unchecked(*self.grid(), out))
    }

    /// `∂_t f` in perturbative form: `L h + Q(h,h)` with `h = f − μ`, from a
    /// single set of convolutions of `h`.
    pub(crate) fn rhs_h(&self, h: &[f64]) -> Vec<f64> {
        let lin = &self.lin;
        let ch = lin.convolver().convolve_all(h);
        let dh = lin.derivatives().apply(h);
        let mu = lin.mu();
        let dmu = lin.dmu();
        let cbar = lin.cbar().data();
        let mut out: Vec<f64> = (0..h.len()).map(|i| -(cbar[i] + ch.c[i]) * h[i] - ch.c[i] * mu[i]).collect();
        for q in 0..6 {
            let w = PAIR_MULT[q];
            let abar = lin.abar()[q].data();
            for i in 0..h.len() {
                out[i] += w * ((abar[i] + ch.a[q][i]) * dh[q][i] + ch.a[q][i] * dmu[q][i]);
            }
        }
        lin.projector().remove(&mut out);
        out
    }

    /// `Σ_i (a*f)_ii` maximized over the grid.
    fn max_trace(&self, f: &[f64]) -> f64 {
        let cf = self.lin.convolver().convolve_all(f);
        (0..f.len()).map(|i| cf.a[0][i] + cf.a[3][i] + cf.a[5][i]).fold(0.0, f64::max)
    }

    /// Explicit RK4 bound `0.5 h² / max Σ_i (a*f)_ii`, never above the Maxwellian one.
    pub fn stable_dt(&self, f: &GridField) -> f64 {
        let h = self.grid().h();
        (0.5 * h * h / self.max_trace(f.data())).min(self.lin.stable_dt())
    }
}

/// `Q(g,f)` with a one-off operator; prefer [`CollisionOperator::apply`] in loops.
pub fn apply_q(g: &GridField, f: &GridField, k: CollisionKernel) -> Result<GridField> {
    g.check_same_grid(f)?;
    CollisionOperator::new(*g.grid(), k)?.apply(g, f)
}

fn log_floored(x: f64, floor: f64) -> f64 {
    x.max(floor).ln()
}

/// `∫ F log F` with `F = max(f, floor)`.
pub fn entropy(f: &GridField, floor: f64) -> f64 {
    f.data().iter().map(|x| x.max(floor) * log_floored(*x, floor)).sum::<f64>() * f.grid().cell()
}

/// `∫ F log(F/μ)` with `F = max(f, floor)`.
///
/// Accumulated as `∫ μ φ(F/μ) + ∫ (F − μ)` with `φ(x) = x log x − x + 1 ≥ 0`,
/// which keeps full relative accuracy when `F` is close to `μ`.
pub fn relative_entropy(f: &GridField, floor: f64) -> f64 {
    let g = f.grid();
    let log_norm = 1.5 * (2.0 * std::f64::consts::PI).ln();
    let (mut pos, mut excess) = (0.0, 0.0);
    for (i, x) in f.data().iter().enumerate() {
        let v = g.node(i);
        let logmu = -0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) - log_norm;
        let mu = logmu.exp();
        let fx = x.max(floor);
        let u = fx / mu - 1.0;
        pos += if mu > 0.0 && u.abs() < 0.5 {
            mu * ((1.0 + u) * u.ln_1p() - u)
        } else {
            fx * (fx.ln() - logmu) - fx + mu
        };
        excess += fx - mu;
    }
    (pos + excess) * g.cell()
}

/// `−∫ Q(f,f)(1 + log F)` with `F = max(f, floor)`.
pub fn dissipation(f: &GridField, k: CollisionKernel, floor: f64) -> Result<f64> {
    let op = CollisionOperator::new(*f.grid(), k)?;
    let q = op.apply(f, f)?;
    Ok(dissipation_of(f, &q, floor))
}

fn dissipation_of(f: &GridField, q: &GridField, floor: f64) -> f64 {
    -f.data().iter().zip(q.data()).map(|(x, r)| r * (1.0 + log_floored(*x, floor))).sum::<f64>() * f.grid().cell()
}

/// Integrates `∂_t f = Q(f,f)` with a fresh operator.
pub fn evolve(f0: &GridField, cfg: &EvolveConfig, k: CollisionKernel) -> Result<EvolutionTrace> {
    let op = CollisionOperator::new(*f0.grid(), k)?;
    evolve_with(&op, f0, cfg)
}

fn rk4(op: &CollisionOperator, h: &mut [f64], dt: f64) {
    let stage = |k: &[f64], c: f64, h: &[f64]| -> Vec<f64> { h.iter().zip(k).map(|(x, y)| x + c * y).collect() };
    let k1 = op.rhs_h(h);
    let k2 = op.rhs_h(&stage(&k1, 0.5 * dt, h));
    let k3 = op.rhs_h(&stage(&k2, 0.5 * dt, h));
    let k4 = op.rhs_h(&stage(&k3, dt, h));
    for i in 0..h.len() {
        h[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    }
}

/// Integrates `∂_t f = Q(f,f)` with RK4 on a prepared operator.
pub fn evolve_with(op: &CollisionOperator, f0: &GridField, cfg: &EvolveConfig) -> Result<EvolutionTrace> {
    cfg.validate()?;
    if f0.grid() != op.grid() {
        return Err(Error::GridMismatch);
    }
    if !f0.is_finite() {
        return Err(Error::NonFinite("initial datum".into()));
    }
    let fmax = f0.max_abs();
    let fmin = f0.data().iter().cloned().fold(f64::INFINITY, f64::min);
    if fmin < -1e-8 * fmax {
        return Err(Error::Domain(format!("initial datum has negative values down to {fmin:.3e}")));
    }
    let grid = *op.grid();
    let bound = op.stable_dt(f0);
    let dt_req = match cfg.dt {
        StepSize::Auto => bound,
        StepSize::Fixed(dt) if dt <= bound * (1.0 + 1e-12) => dt,
        StepSize::Fixed(dt) => return Err(Error::Unstable { dt, bound }),
    };
    let interval = cfg.t_end / cfg.outputs as f64;
    let per_output = (interval / dt_req - 1e-9).ceil().max(1.0) as usize;
    let dt = interval / per_output as f64;

    let proj = op.linear().projector();
    let mu = op.linear().mu().to_vec();
    let mut h: Vec<f64> = f0.data().iter().zip(&mu).map(|(f, m)| f - m).collect();
    let target = proj.moments(f0.data());
    let h0_size = h.iter().map(|x| x.abs()).sum::<f64>().max(1e-300);

    let mut trace = EvolutionTrace { dt, steps: per_output * cfg.outputs, ..Default::default() };
    for spec in &cfg.norms {
        trace.norms.push((spec.tag(), Vec::new()));
    }
    for spec in &cfg.f_norms {
        trace.norms.push((format!("f:{}", spec.tag()), Vec::new()));
    }
    if cfg.sobolev_monitor {
        trace.norms.push(("H1".into(), Vec::new()));
        trace.norms.push(("H2".into(), Vec::new()));
    }

    let record = |t: f64, h: &[f64], trace: &mut EvolutionTrace| -> Result<()> {
        let f: Vec<f64> = h.iter().zip(&mu).map(|(x, m)| x + m).collect();
        let ff = GridField::from_vec_unchecked(grid, f);
        let hf = GridField::from_vec_unchecked(grid, h.to_vec());
        let m = proj.moments(ff.data());
        let max = ff.max_abs();
        let floor = cfg.floor * max;
        let rhs = GridField::from_vec_unchecked(grid, op.rhs_h(h));
        trace.times.push(t);
        trace.mass.push(m[0]);
        trace.momentum.push([m[1], m[2], m[3]]);
        trace.energy.push(m[4]);
        trace.entropy.push(entropy(&ff, floor));
        trace.relative_entropy.push(relative_entropy(&ff, floor));
        trace.dissipation.push(dissipation_of(&ff, &rhs, floor));
        trace.boundary_mass.push(ff.boundary_mass());
        let mut col = 0;
        for spec in &cfg.norms {
            let x = norm(&hf, spec)?;
            trace.norms[col].1.push(x);
            col += 1;
        }
        for spec in &cfg.f_norms {
            let x = norm(&ff, spec)?;
            trace.norms[col].1.push(x);
            col += 1;
        }
        if cfg.sobolev_monitor {
            let l2 = NormSpec::plain(2.0)?;
            let h1 = sobolev_norm(&hf, &l2, 1)?;
            let h2 = sobolev_norm(&hf, &l2, 2)?;
            trace.norms[col].1.push(h1);
            trace.norms[col + 1].1.push(h2);
        }
        let min = ff.data().iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-8 * max && trace.negativity.is_none() {
            trace.negativity = Some((t, min));
        }
        if cfg.keep_snapshots {
            trace.snapshots.push(hf);
        }
        Ok(())
    };

    record(0.0, &h, &mut trace)?;
    for o in 1..=cfg.outputs {
        for _ in 0..per_output {
            rk4(op, &mut h, dt);
            if cfg.conserve_project {
                let mut f: Vec<f64> = h.iter().zip(&mu).map(|(x, m)| x + m).collect();
                let now = proj.moments(&f);
                let c = proj.solve(std::array::from_fn(|k| target[k] - now[k]));
                proj.add_combination(&mut f, c);
                for ((x, y), m) in h.iter_mut().zip(&f).zip(&mu) {
                    *x = y - m;
                }
            }
        }
        let t = o as f64 * interval;
        let size = h.iter().map(|x| x.abs()).sum::<f64>();
        if !size.is_finite() || size > 1e6 * h0_size.max(1.0) {
            return Err(Error::BlowUp { t, factor: size / h0_size });
        }
        record(t, &h, &mut trace)?;
    }
    let f: Vec<f64> = h.iter().zip(&mu).map(|(x, m)| x + m).collect();
    trace.final_state = Some(GridField::from_vec_unchecked(grid, f));
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::maxwellian;

    fn op() -> CollisionOperator {
        CollisionOperator::new(VelocityGrid::new(12, 5.0).unwrap(), CollisionKernel::new(1.0).unwrap()).unwrap()
    }

    #[test]
    fn bilinearity() {
        let op = op();
        let g = *op.grid();
        let a = GridField::from_fn(g, |v| (1.0 + 0.3 * v[0]) * maxwellian(v));
        let b = GridField::from_fn(g, |v| (1.0 + 0.2 * v[1] * v[2]) * maxwellian(v));
        let h = GridField::from_fn(g, |v| (-(v[0] - 0.5).powi(2) - v[1] * v[1] - v[2] * v[2]).exp());
        let qa = op.apply(&a, &h).unwrap();
        let q2a = op.apply(&a.scaled(2.5), &h).unwrap();
        assert!(q2a.sub(&qa.scaled(2.5)).unwrap().max_abs() < 1e-12 * q2a.max_abs());
        let qb = op.apply(&b, &h).unwrap();
        let qab = op.apply(&a.add(&b).unwrap(), &h).unwrap();
        assert!(qab.sub(&qa.add(&qb).unwrap()).unwrap().max_abs() < 1e-12 * qab.max_abs());
    }

    #[test]
    fn linearisation_identity() {
        let op = op();
        let g = *op.grid();
        let mu = GridField::maxwellian(g);
        let h = GridField::from_fn(g, |v| v[0] * v[1] * (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp());
        let l = op.linear().apply_l(&h).unwrap();
        let q = op.apply(&mu, &h).unwrap().add(&op.apply(&h, &mu).unwrap()).unwrap();
        assert!(q.sub(&l).unwrap().max_abs() < 1e-12 * l.max_abs());
    }

    #[test]
    fn maxwellian_is_stationary() {
        let op = op();
        let mu = GridField::maxwellian(*op.grid());
        let cfg = EvolveConfig { t_end: 0.02, outputs: 2, ..Default::default() };
        let tr = evolve_with(&op, &mu, &cfg).unwrap();
        assert!(tr.norms[0].1.iter().all(|x| *x < 1e-14));
        assert!(relative_entropy(&mu, 1e-300).abs() < 1e-8);
    }

    #[test]
    fn entropy_conventions() {
        let g = VelocityGrid::new(16, 7.0).unwrap();
        let mu = GridField::maxwellian(g);
        // ∫ μ log μ = −3/2 (1 + log 2π)
        let exact = -1.5 * (1.0 + (2.0 * std::f64::consts::PI).ln());
        assert!((entropy(&mu, 1e-300) - exact).abs() < 1e-6);
    }

    #[test]
    fn config_validation() {
        let bad = EvolveConfig { floor: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = EvolveConfig { eps: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(EvolveConfig::default().validate().is_ok());
    }
}
