//! JSON experiment reports and the CSV coefficient dump.

use std::collections::BTreeMap;
use std::path::Path;

use fraclab_core::regularity::{CoefficientRow, Verdict};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;
use crate::CliError;

pub const TOOL: &str = "fraclab";

/// Predicted value with a descriptive tag naming the law it comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub value: Option<f64>,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub verdict: Verdict,
    pub tolerance: f64,
    pub measured: Option<f64>,
    pub predicted: Option<f64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    /// the only field allowed to differ between identical runs
    pub wall_time_s: f64,
}

/// Maps are ordered, and floats print in shortest round-trip form, so
/// identical runs serialize identically apart from `meta.wall_time_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: RunConfig,
    pub measured: BTreeMap<String, Value>,
    pub predicted: BTreeMap<String, Prediction>,
    pub verdicts: BTreeMap<String, VerdictEntry>,
    pub meta: Meta,
}

impl ExperimentReport {
    pub fn new(config: RunConfig) -> Self {
        ExperimentReport {
            config,
            measured: BTreeMap::new(),
            predicted: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            meta: Meta { tool: TOOL.into(), version: env!("CARGO_PKG_VERSION").into(), wall_time_s: 0.0 },
        }
    }

    pub fn measure(&mut self, key: &str, value: impl Into<Value>) {
        self.measured.insert(key.into(), value.into());
    }

    pub fn predict(&mut self, key: &str, value: Option<f64>, tag: impl Into<String>) {
        self.predicted.insert(key.into(), Prediction { value, tag: tag.into() });
    }

    pub fn judge(&mut self, key: &str, entry: VerdictEntry) {
        self.verdicts.insert(key.into(), entry);
    }

    /// No verdict failed; unassessed entries do not count against the run.
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|v| v.verdict != Verdict::Fail)
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(format!("serializing report: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self, CliError> {
        serde_json::from_str(s).map_err(|e| CliError::Io(format!("parsing report: {e}")))
    }
}

pub fn write_coefficients(path: &Path, rows: &[CoefficientRow]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
