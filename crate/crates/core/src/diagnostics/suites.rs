//! Verification suites over nonlinear traces: the polynomial phase, the
//! entropy/entropy-dissipation monitor and the two-phase bootstrap.

use super::fit::{fit_exponential, DecayReport, Verdict, MIN_SAMPLES};
use super::norm::NormSpec;
use crate::error::{Error, Result};
use crate::nonlinear::{evolve_with, CollisionOperator, EvolutionTrace, EvolveConfig};
use crate::vgrid::GridField;
use serde::{Deserialize, Serialize};

/// Relative entropies below this are treated as converged noise.
const ENTROPY_NOISE: f64 = 1e-13;
/// Slack for monotonicity of `H(f_t|μ)`, relative to its initial value.
const MONOTONE_SLACK: f64 = 1e-8;

/// Whether `values` stop growing: the sup over the final quarter does not
/// exceed the sup over the rest by more than `1 + tol`.
fn settles(values: &[f64], tol: f64) -> bool {
    if values.iter().any(|x| !x.is_finite()) {
        return false;
    }
    if values.len() < 4 {
        return true;
    }
    let cut = values.len() - values.len() / 4;
    let head = values[..cut].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tail = values[cut..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    tail <= head.max(0.0) * (1.0 + tol) + f64::MIN_POSITIVE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    /// `sup_t H(f_t|μ) (1+t)^{2/γ}`.
    pub entropy_constant: f64,
    pub entropy_bounded: bool,
    /// `sup_{t ≥ t0} ‖f_t‖_{L¹(⟨v⟩^θ)}` for each recorded moment tag.
    pub moment_sups: Vec<(String, f64)>,
    pub moments_bounded: bool,
    /// `H(f_t|μ)` nonincreasing up to a relative slack.
    pub entropy_monotone: bool,
    pub t0: f64,
    pub verdict: Verdict,
}

/// Checks the polynomial-rate phase on a trace: bounded `H(f_t|μ)(1+t)^{2/γ}`,
/// bounded moments after `t0` (every `f:L1(<v>^θ)` series present), and
/// monotone relative entropy.
pub fn polynomial_phase_check(trace: &EvolutionTrace, gamma: f64, t0: f64) -> Result<PhaseReport> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParam(format!("polynomial phase needs γ > 0, got {gamma}")));
    }
    if trace.times.is_empty() {
        return Err(Error::Insufficient("empty trace".into()));
    }
    let scaled: Vec<f64> = trace
        .times
        .iter()
        .zip(&trace.relative_entropy)
        .map(|(t, h)| h.max(0.0) * (1.0 + t).powf(2.0 / gamma))
        .collect();
    let entropy_constant = scaled.iter().cloned().fold(0.0, f64::max);
    let entropy_bounded = settles(&scaled, 1e-6);

    let mut moment_sups = Vec::new();
    let mut moments_bounded = true;
    for (tag, values) in &trace.norms {
        if !tag.starts_with("f:L1(<v>^") {
            continue;
        }
        let after: Vec<f64> =
            trace.times.iter().zip(values).filter(|(t, _)| **t >= t0).map(|(_, v)| *v).collect();
        let sup = after.iter().cloned().fold(0.0, f64::max);
        moments_bounded &= settles(&after, 1e-6);
        moment_sups.push((tag.clone(), sup));
    }

    let h0 = trace.relative_entropy[0].abs();
    let entropy_monotone =
        trace.relative_entropy.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK * h0.max(f64::MIN_POSITIVE));
    let verdict = if entropy_bounded && moments_bounded && entropy_monotone { Verdict::Pass } else { Verdict::Fail };
    Ok(PhaseReport { entropy_constant, entropy_bounded, moment_sups, moments_bounded, entropy_monotone, t0, verdict })
}

/// Empirical constants of `D(f) ≥ min{δ1 H(f|μ), δ2 H(f|μ)^{1+γ/2}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyDissipationReport {
    /// `inf D / H(f|μ)`.
    pub delta1: f64,
    /// `inf D / H(f|μ)^{1+γ/2}`.
    pub delta2: f64,
    /// `inf D / min{H, H^{1+γ/2}}`.
    pub ratio_inf: f64,
    /// Samples with `H(f|μ)` above the noise level.
    pub samples: usize,
    pub bounded_away: bool,
}

pub fn entropy_dissipation_monitor(trace: &EvolutionTrace, gamma: f64) -> EntropyDissipationReport {
    let (mut d1, mut d2, mut r) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut samples = 0;
    for (h, d) in trace.relative_entropy.iter().zip(&trace.dissipation) {
        if !(*h > ENTROPY_NOISE) {
            continue;
        }
        samples += 1;
        let hp = h.powf(1.0 + gamma / 2.0);
        d1 = d1.min(d / h);
        d2 = d2.min(d / hp);
        r = r.min(d / h.min(hp));
    }
    EntropyDissipationReport { delta1: d1, delta2: d2, ratio_inf: r, samples, bounded_away: samples > 0 && r > 0.0 }
}

/// Two-phase bootstrap settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    /// Weight exponent of the entry test `‖h_t‖_{L¹(⟨v⟩^ℓ)} ≤ ε`.
    pub ell: f64,
    /// Weight exponent of the decay norm `‖h_t‖_{L¹(⟨v⟩^k)}`.
    pub k: f64,
    pub threshold: f64,
    pub lambda0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    /// First output time with `‖h_t‖_{L¹(⟨v⟩^ℓ)} ≤ ε`.
    pub t0: Option<f64>,
    /// `sup_{t ≥ t0} ‖h_t‖ e^{λ0 (t − t0)} / ‖h_{t0}‖` in `L¹(⟨v⟩^k)`.
    pub c_prime: Option<f64>,
    pub decay: Option<DecayReport>,
    pub vacuous: bool,
    pub verdict: Verdict,
}

/// Norms the bootstrap reads from a trace.
pub fn bootstrap_norms(cfg: &BootstrapConfig) -> Result<[NormSpec; 2]> {
    Ok([NormSpec::l1_poly(cfg.ell)?, NormSpec::l1_poly(cfg.k)?])
}

/// The bootstrap on an existing trace that recorded [`bootstrap_norms`].
pub fn bootstrap_from_trace(trace: &EvolutionTrace, cfg: &BootstrapConfig) -> Result<BootstrapReport> {
    let [entry, decay] = bootstrap_norms(cfg)?;
    let find = |spec: &NormSpec| {
        trace
            .norms
            .iter()
            .find(|(t, _)| *t == spec.tag())
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| Error::InvalidParam(format!("trace lacks series {}", spec.tag())))
    };
    let (entry, decay) = (find(&entry)?, find(&decay)?);
    if decay.iter().all(|x| *x <= 1e-12) {
        return Ok(BootstrapReport { t0: Some(0.0), c_prime: None, decay: None, vacuous: true, verdict: Verdict::Pass });
    }
    let Some(i0) = entry.iter().position(|x| *x <= cfg.threshold) else {
        return Ok(BootstrapReport { t0: None, c_prime: None, decay: None, vacuous: false, verdict: Verdict::Inconclusive });
    };
    let t0 = trace.times[i0];
    let t_end = *trace.times.last().expect("nonempty trace");
    if trace.times.len() - i0 < MIN_SAMPLES {
        return Ok(BootstrapReport { t0: Some(t0), c_prime: None, decay: None, vacuous: false, verdict: Verdict::Inconclusive });
    }
    let c_prime = trace.times[i0..]
        .iter()
        .zip(&decay[i0..])
        .map(|(t, x)| x * (cfg.lambda0 * (t - t0)).exp() / decay[i0])
        .fold(0.0, f64::max);
    let report = fit_exponential(&trace.times, decay, Some((t0, t_end)), cfg.lambda0)?;
    let verdict = report.verdict;
    Ok(BootstrapReport { t0: Some(t0), c_prime: Some(c_prime), decay: Some(report), vacuous: false, verdict })
}

/// Runs the nonlinear evolution from `f0` with the bootstrap norms added to
/// `evolve`, then applies [`bootstrap_from_trace`].
pub fn bootstrap_demo(
    op: &CollisionOperator,
    f0: &GridField,
    evolve: &EvolveConfig,
    cfg: &BootstrapConfig,
) -> Result<(BootstrapReport, EvolutionTrace)> {
    let gamma = op.kernel().gamma();
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParam(format!("bootstrap needs γ in (0, 1], got {gamma}")));
    }
    let mut run = evolve.clone();
    for spec in bootstrap_norms(cfg)? {
        if !run.norms.contains(&spec) {
            run.norms.push(spec);
        }
    }
    let trace = evolve_with(op, f0, &run)?;
    Ok((bootstrap_from_trace(&trace, cfg)?, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{maxwellian, CollisionKernel};
    use crate::vgrid::VelocityGrid;

    fn op() -> CollisionOperator {
        CollisionOperator::new(VelocityGrid::new(12, 5.0).unwrap(), CollisionKernel::new(1.0).unwrap()).unwrap()
    }

    #[test]
    fn settles_detects_growth() {
        assert!(settles(&[3.0, 2.0, 1.0, 0.5, 0.2, 0.1, 0.1, 0.05], 0.0));
        assert!(!settles(&[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 3.0], 0.0));
        assert!(!settles(&[1.0, f64::NAN], 0.0));
    }

    #[test]
    fn maxwellian_start_is_trivial() {
        let op = op();
        let mu = GridField::maxwellian(*op.grid());
        let cfg = EvolveConfig {
            t_end: 0.05,
            outputs: 10,
            f_norms: vec![NormSpec::l1_poly(4.0).unwrap()],
            ..Default::default()
        };
        let bc = BootstrapConfig { ell: 2.0, k: 3.0, threshold: 0.1, lambda0: 25.0 };
        let (rep, trace) = bootstrap_demo(&op, &mu, &cfg, &bc).unwrap();
        assert!(rep.vacuous && rep.verdict == Verdict::Pass);
        let phase = polynomial_phase_check(&trace, 1.0, 0.0).unwrap();
        assert_eq!(phase.verdict, Verdict::Pass);
        assert!(phase.entropy_constant < 1e-10);
        assert_eq!(entropy_dissipation_monitor(&trace, 1.0).samples, 0);
    }

    #[test]
    fn huge_threshold_enters_at_once() {
        let op = op();
        let g = *op.grid();
        let f0 = GridField::from_fn(g, |v| maxwellian(v) * (1.0 + 0.1 * (v[0] * v[0] - v[1] * v[1]).tanh()));
        let cfg = EvolveConfig { t_end: 0.1, outputs: 20, ..Default::default() };
        let bc = BootstrapConfig { ell: 2.0, k: 3.0, threshold: 10.0, lambda0: 25.0 };
        let (rep, trace) = bootstrap_demo(&op, &f0, &cfg, &bc).unwrap();
        assert_eq!(rep.t0, Some(0.0));
        let d = rep.decay.unwrap();
        assert_eq!(d.fit_window, (0.0, 0.1));
        let edi = entropy_dissipation_monitor(&trace, 1.0);
        assert!(edi.bounded_away && edi.samples > 10);
    }

    #[test]
    fn unreachable_threshold_is_inconclusive() {
        let op = op();
        let g = *op.grid();
        let f0 = GridField::from_fn(g, |v| maxwellian(v) * (1.0 + 0.1 * (v[0] * v[0] - v[1] * v[1]).tanh()));
        let cfg = EvolveConfig { t_end: 0.01, outputs: 4, ..Default::default() };
        let bc = BootstrapConfig { ell: 2.0, k: 3.0, threshold: 1e-30, lambda0: 25.0 };
        let (rep, _) = bootstrap_demo(&op, &f0, &cfg, &bc).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
        assert!(rep.t0.is_none());
    }
}
