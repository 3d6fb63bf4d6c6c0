use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One JSONL result line: `{op, bodies, n, params, value, se, seed, certified}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateRecord {
    pub op: String,
    pub bodies: Vec<String>,
    pub n: usize,
    pub params: serde_json::Value,
    pub value: f64,
    pub se: Option<f64>,
    pub seed: u64,
    pub certified: bool,
}

impl EstimateRecord {
    pub fn to_line(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_line(line: &str) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| Error::Parse(format!("record line: {e}")))
    }
}
