//! Least-squares fits of exponential and power-law behaviour on time series.

use crate::error::{Error, Result};
use faer::prelude::SpSolverLstsq;
use faer::Mat;
use serde::{Deserialize, Serialize};

/// Relative rate tolerance for a passing fit.
pub const RATE_TOL: f64 = 0.2;
/// Minimum coefficient of determination for a conclusive fit.
pub const R2_MIN: f64 = 0.98;
/// Fraction of the trace, counted from the end, used by default.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.6;
/// Minimum number of samples inside a fit window.
pub const MIN_SAMPLES: usize = 8;

/// A recorded trace exposing named series over a common time axis.
pub trait TimeSeries {
    fn times(&self) -> &[f64];
    fn series(&self, tag: &str) -> Option<&[f64]>;
}

/// A single named series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub tag: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries for Series {
    fn times(&self) -> &[f64] {
        &self.times
    }

    fn series(&self, tag: &str) -> Option<&[f64]> {
        (tag == self.tag).then_some(self.values.as_slice())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Fitted `C e^{−λ t}` on a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub fitted_rate: f64,
    pub prefactor: f64,
    pub fit_window: (f64, f64),
    pub r_squared: f64,
    pub reference_rate: f64,
    pub samples: usize,
    pub verdict: Verdict,
}

impl DecayReport {
    /// `|λ_fit − λ_ref| / λ_ref`.
    pub fn relative_error(&self) -> f64 {
        (self.fitted_rate - self.reference_rate).abs() / self.reference_rate.abs()
    }
}

/// Ordinary least squares `y = α + β x`, returning `(α, β, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let beta = sxy / sxx;
    let alpha = my - beta * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    (alpha, beta, r2)
}

/// Default window: the last 60% of the recorded time span.
pub fn default_window(times: &[f64]) -> (f64, f64) {
    let (t0, t1) = (times[0], times[times.len() - 1]);
    (t0 + (1.0 - DEFAULT_WINDOW_FRACTION) * (t1 - t0), t1)
}

/// Log-linear fit of `values` on `window` against a reference decay rate.
pub fn fit_exponential(
    times: &[f64],
    values: &[f64],
    window: Option<(f64, f64)>,
    reference_rate: f64,
) -> Result<DecayReport> {
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::Insufficient("empty or ragged series".into()));
    }
    let (lo, hi) = window.unwrap_or_else(|| default_window(times));
    let eps = 1e-12 * (1.0 + hi.abs());
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (t, v) in times.iter().zip(values) {
        if *t >= lo - eps && *t <= hi + eps {
            if !(*v > 0.0) {
                return Err(Error::Domain(format!("nonpositive norm {v} at t = {t}")));
            }
            x.push(*t);
            y.push(v.ln());
        }
    }
    if x.len() < MIN_SAMPLES {
        return Err(Error::Insufficient(format!(
            "{} samples in window [{lo}, {hi}], need {MIN_SAMPLES}",
            x.len()
        )));
    }
    let (alpha, beta, r2) = linear_fit(&x, &y);
    let rate = -beta;
    let verdict = if r2 < R2_MIN {
        Verdict::Inconclusive
    } else if (rate - reference_rate).abs() <= RATE_TOL * reference_rate.abs() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(DecayReport {
        fitted_rate: rate,
        prefactor: alpha.exp(),
        fit_window: (lo, hi),
        r_squared: r2,
        reference_rate,
        samples: x.len(),
        verdict,
    })
}

/// [`fit_exponential`] on the series `tag` of a trace.
pub fn fit_decay<T: TimeSeries + ?Sized>(
    trace: &T,
    tag: &str,
    window: Option<(f64, f64)>,
    reference_rate: f64,
) -> Result<DecayReport> {
    let values = trace
        .series(tag)
        .ok_or_else(|| Error::InvalidParam(format!("trace has no series '{tag}'")))?;
    fit_exponential(trace.times(), values, window, reference_rate)
}

/// Slope and `r²` of `log y` against `log t`.
pub fn power_law_fit(times: &[f64], values: &[f64]) -> Result<(f64, f64)> {
    if times.iter().zip(values).any(|(t, v)| !(*t > 0.0 && *v > 0.0)) {
        return Err(Error::Domain("power-law fit needs positive data".into()));
    }
    if times.len() < 3 {
        return Err(Error::Insufficient("power-law fit needs 3 samples".into()));
    }
    let x: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (_, beta, r2) = linear_fit(&x, &y);
    Ok((beta, r2))
}

/// Fit of `log y = q log t + β t + c`: an algebraic factor `t^q` times an
/// exponential `e^{β t}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizationFit {
    pub exponent: f64,
    pub exp_rate: f64,
    pub log_prefactor: f64,
    pub r_squared: f64,
}

/// Least-squares [`RegularizationFit`] on positive samples with `t > 0`.
pub fn regularization_fit(times: &[f64], values: &[f64]) -> Result<RegularizationFit> {
    if times.len() != values.len() || times.len() < 4 {
        return Err(Error::Insufficient("regularization fit needs 4 samples".into()));
    }
    if times.iter().zip(values).any(|(t, v)| !(*t > 0.0 && *v > 0.0)) {
        return Err(Error::Domain("regularization fit needs positive data".into()));
    }
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let a = Mat::<f64>::from_fn(times.len(), 3, |i, j| match j {
        0 => times[i].ln(),
        1 => times[i],
        _ => 1.0,
    });
    let b = Mat::<f64>::from_fn(times.len(), 1, |i, _| y[i]);
    let x = a.qr().solve_lstsq(&b);
    let (q, beta, c) = (x.read(0, 0), x.read(1, 0), x.read(2, 0));
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 =
        times.iter().zip(&y).map(|(t, v)| (v - (q * t.ln() + beta * t + c)).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(RegularizationFit { exponent: q, exp_rate: beta, log_prefactor: c, r_squared: r2 })
}
