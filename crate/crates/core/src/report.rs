//! Versioned JSON run report, validated against the bundled schema before
//! it is written.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::{EvaluationReport, SplitInfo};
use crate::stats::{Construction, DescriptiveStats, TestOutcome};
use crate::timeseries::Variable;

pub const REPORT_VERSION: u32 = 1;
pub const SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Stats,
    Test,
    Fit,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    FullWindow,
    Training,
    Holdout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub location: String,
    pub from: NaiveDate,
    pub to: NaiveDate,
    pub n: usize,
    pub fixture_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableStats {
    pub variable: Variable,
    pub stats: DescriptiveStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub variable: Variable,
    pub construction: Construction,
    pub outcome: TestOutcome,
    pub alpha: f64,
    pub conclusion: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub model: String,
    pub train_from: NaiveDate,
    pub train_to: NaiveDate,
    pub n: usize,
    pub params: BTreeMap<String, f64>,
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    pub r_squared: f64,
    pub mape: Option<f64>,
    pub mape_percent: Option<f64>,
    pub n: usize,
    pub split: Option<SplitInfo>,
}

impl From<&EvaluationReport> for Metrics {
    fn from(e: &EvaluationReport) -> Self {
        Metrics {
            mse: e.mse,
            r_squared: e.r_squared,
            mape: e.mape,
            mape_percent: e.mape_percent(),
            n: e.n,
            split: e.split.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub model: String,
    pub scope: Scope,
    pub from: NaiveDate,
    pub to: NaiveDate,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub report_version: u32,
    pub command: Command,
    pub metadata: Metadata,
    pub descriptive: Vec<VariableStats>,
    pub tests: Vec<TestRecord>,
    pub fits: Vec<FitRecord>,
    pub evaluations: Vec<EvaluationRecord>,
    pub charts: Vec<String>,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn new(command: Command, metadata: Metadata) -> Self {
        RunReport {
            report_version: REPORT_VERSION,
            command,
            metadata,
            descriptive: Vec::new(),
            tests: Vec::new(),
            fits: Vec::new(),
            evaluations: Vec::new(),
            charts: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Pretty JSON, validated against the schema.
    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        validate(&value)?;
        Ok(serde_json::to_string_pretty(&value)? + "\n")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = self.to_json()?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        validate(&value)?;
        Ok(serde_json::from_value(value)?)
    }
}

fn validator() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| {
        let schema: serde_json::Value =
            serde_json::from_str(SCHEMA).expect("bundled schema is valid JSON");
        jsonschema::validator_for(&schema).expect("bundled schema compiles")
    })
}

/// Checks a JSON value against the bundled report schema.
pub fn validate(value: &serde_json::Value) -> Result<()> {
    let errors: Vec<String> = validator()
        .iter_errors(value)
        .map(|e| format!("{}: {}", e.instance_path, e))
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::Schema(errors.join("; ")))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
