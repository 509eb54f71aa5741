//! JSON reports with a stable schema: `report_type`, `inputs_digest`,
//! `inputs`, `metrics`, `verdict`.

use super::fit::Verdict;
use crate::error::Result;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub report_type: String,
    /// SHA-256 of the compact JSON encoding of `inputs`.
    pub inputs_digest: String,
    pub inputs: Value,
    pub metrics: Value,
    pub verdict: Verdict,
}

impl Report {
    pub fn new<I: Serialize, M: Serialize>(report_type: &str, inputs: &I, metrics: &M, verdict: Verdict) -> Result<Self> {
        let inputs = serde_json::to_value(inputs)?;
        Ok(Self {
            report_type: report_type.to_string(),
            inputs_digest: digest(&inputs)?,
            inputs,
            metrics: serde_json::to_value(metrics)?,
            verdict,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Hex SHA-256 of the compact JSON encoding of `value`.
pub fn digest(value: &Value) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// `Pass` iff every verdict passes; any `Fail` wins over `Inconclusive`.
pub fn combine(verdicts: &[Verdict]) -> Verdict {
    if verdicts.iter().any(|v| *v == Verdict::Fail) {
        Verdict::Fail
    } else if verdicts.iter().all(|v| *v == Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    }
}
