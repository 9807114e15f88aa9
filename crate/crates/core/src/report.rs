//! Shared JSON shape for equilibrium reports.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub family: String,
    pub parameters: serde_json::Value,
    pub n: usize,
    pub positions: serde_json::Value,
    pub residual_inf: f64,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_zero_deviation: Option<f64>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl ReportRecord {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
