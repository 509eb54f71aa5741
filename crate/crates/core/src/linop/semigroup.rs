//! Explicit RK4 integration of `∂_t h = B h` or `∂_t h = L h`.

use super::LinearisedOperator;
use crate::diagnostics::fit::TimeSeries;
use crate::diagnostics::norm::{norm, NormSpec};
use crate::error::{Error, Result};
use crate::vgrid::GridField;
use serde::{Deserialize, Serialize};

/// Which generator to integrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    B,
    L,
}

/// Growth factor of the flat `L²` norm that counts as blow-up.
const BLOWUP: f64 = 1e6;

/// Norm time series of one linear run.
#[derive(Clone, Debug)]
pub struct SemigroupTrace {
    pub generator: Generator,
    pub dt: f64,
    pub steps: usize,
    pub times: Vec<f64>,
    pub tags: Vec<String>,
    /// `norms[k][i]`: norm `k` at `times[i]`.
    pub norms: Vec<Vec<f64>>,
    pub final_state: GridField,
}

impl TimeSeries for SemigroupTrace {
    fn times(&self) -> &[f64] {
        &self.times
    }

    fn series(&self, tag: &str) -> Option<&[f64]> {
        self.tags.iter().position(|t| t == tag).map(|k| self.norms[k].as_slice())
    }
}

fn rhs(op: &LinearisedOperator, which: Generator, h: &[f64]) -> Vec<f64> {
    match which {
        Generator::B => op.b_vec(h),
        Generator::L => op.l_vec(h),
    }
}

fn rk4_step(op: &LinearisedOperator, which: Generator, h: &mut [f64], dt: f64) {
    let stage = |base: &[f64], k: &[f64], c: f64| -> Vec<f64> {
        base.iter().zip(k).map(|(x, y)| x + c * y).collect()
    };
    let k1 = rhs(op, which, h);
    let k2 = rhs(op, which, &stage(h, &k1, 0.5 * dt));
    let k3 = rhs(op, which, &stage(h, &k2, 0.5 * dt));
    let k4 = rhs(op, which, &stage(h, &k3, dt));
    for i in 0..h.len() {
        h[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    }
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_dt(op: &LinearisedOperator, dt: f64) -> Result<()> {
    let bound = op.stable_dt();
    if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
        return Err(Error::Unstable { dt, bound });
    }
    Ok(())
}

/// `S(t) h` with `⌈t/dt⌉` equal RK4 steps.
pub fn propagate(op: &LinearisedOperator, which: Generator, h: &[f64], t: f64, dt: f64) -> Result<Vec<f64>> {
    check_dt(op, dt)?;
    let mut x = h.to_vec();
    if t <= 0.0 {
        return Ok(x);
    }
    let steps = (t / dt - 1e-9).ceil().max(1.0) as usize;
    let step = t / steps as f64;
    for _ in 0..steps {
        rk4_step(op, which, &mut x, step);
    }
    Ok(x)
}

/// Integrates `h0` to `t_end`, recording every norm in `norms` at `outputs + 1`
/// equally spaced times. The actual step is the largest `≤ dt` that hits every
/// output time exactly.
pub fn evolve_semigroup(
    op: &LinearisedOperator,
    which: Generator,
    h0: &GridField,
    t_end: f64,
    dt: f64,
    norms: &[NormSpec],
    outputs: usize,
) -> Result<SemigroupTrace> {
    if *h0.grid() != *op.grid() {
        return Err(Error::GridMismatch);
    }
    check_dt(op, dt)?;
    if !(t_end > 0.0) || outputs == 0 {
        return Err(Error::InvalidParam("need t_end > 0 and at least one output".into()));
    }
    let interval = t_end / outputs as f64;
    let per_output = (interval / dt - 1e-9).ceil().max(1.0) as usize;
    let step = interval / per_output as f64;
    let grid = *op.grid();
    let mut h = h0.data().to_vec();
    let start = l2(&h);
    let record = |h: &[f64], out: &mut Vec<Vec<f64>>| -> Result<()> {
        let f = GridField::from_vec_unchecked(grid, h.to_vec());
        for (k, spec) in norms.iter().enumerate() {
            out[k].push(norm(&f, spec)?);
        }
        Ok(())
    };
    let mut series = vec![Vec::with_capacity(outputs + 1); norms.len()];
    let mut times = vec![0.0];
    record(&h, &mut series)?;
    for o in 1..=outputs {
        for _ in 0..per_output {
            rk4_step(op, which, &mut h, step);
        }
        let t = o as f64 * interval;
        let now = l2(&h);
        if !now.is_finite() {
            return Err(Error::BlowUp { t, factor: f64::INFINITY });
        }
        if start > 0.0 && now > BLOWUP * start {
            return Err(Error::BlowUp { t, factor: now / start });
        }
        times.push(t);
        record(&h, &mut series)?;
    }
    Ok(SemigroupTrace {
        generator: which,
        dt: step,
        steps: per_output * outputs,
        times,
        tags: norms.iter().map(|s| s.tag()).collect(),
        norms: series,
        final_state: GridField::from_vec_unchecked(grid, h),
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::small_op;
    use super::*;

    #[test]
    fn null_direction_is_stationary() {
        let op = small_op(10);
        let grid = *op.grid();
        let h0 = GridField::from_fn(grid, |v| v[1] * crate::kernel::maxwellian(v));
        let dt = op.stable_dt();
        let tr = evolve_semigroup(&op, Generator::L, &h0, 0.05, dt, &[NormSpec::hilbert()], 5).unwrap();
        let drift = tr.final_state.sub(&h0).unwrap().max_abs() / h0.max_abs();
        assert!(drift < 1e-2, "{drift}");
        assert_eq!(tr.times.len(), 6);
        assert!((tr.times[5] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rejects_unstable_steps() {
        let op = small_op(8);
        let h0 = GridField::zeros(*op.grid());
        let dt = 2.0 * op.stable_dt();
        assert!(matches!(
            evolve_semigroup(&op, Generator::B, &h0, 0.1, dt, &[], 2),
            Err(Error::Unstable { .. })
        ));
    }

    #[test]
    fn propagate_composes() {
        let op = small_op(8);
        let grid = *op.grid();
        let h0 = super::super::tests::random_smooth(grid, 5);
        let dt = op.stable_dt();
        let a = propagate(&op, Generator::L, h0.data(), 0.02, dt).unwrap();
        let b = propagate(&op, Generator::L, &propagate(&op, Generator::L, h0.data(), 0.01, dt).unwrap(), 0.01, dt)
            .unwrap();
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8 * h0.max_abs(), "{err}");
    }
}
