//! Experiment reports: stable CSV column order, JSON with full metadata.
//!
//! Re-running an experiment with the same configuration reproduces the rows
//! bit-identically; the only line that may differ is the `generated_at`
//! timestamp, which consumers strip before comparing.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Report(format!(
                "unknown format '{other}'; expected csv or json"
            ))),
        }
    }
}

/// Reproducibility metadata carried by every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportMeta {
    pub seed: u64,
    pub trunc_k: usize,
    pub trials: usize,
    pub tol: f64,
    pub generated_at_unix: u64,
}

impl ReportMeta {
    pub fn new(seed: u64, trunc_k: usize, trials: usize, tol: f64) -> Self {
        ReportMeta {
            seed,
            trunc_k,
            trials,
            tol,
            generated_at_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

/// Rows of (parameters, estimate, diagnostics) plus metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: String,
    pub params: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub diagnostics: BTreeMap<String, Value>,
    pub meta: ReportMeta,
}

fn fmt_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl ExperimentReport {
    pub fn new(kind: &str, columns: &[&str], meta: ReportMeta) -> Self {
        ExperimentReport {
            kind: kind.to_string(),
            params: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            diagnostics: BTreeMap::new(),
            meta,
        }
    }

    pub fn set_param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    pub fn set_diag(&mut self, key: &str, value: impl Into<Value>) {
        self.diagnostics.insert(key.to_string(), value.into());
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn diag_f64(&self, key: &str) -> Option<f64> {
        self.diagnostics.get(key).and_then(|v| v.as_f64())
    }

    pub fn diag_bool(&self, key: &str) -> Option<bool> {
        self.diagnostics.get(key).and_then(|v| v.as_bool())
    }

    /// CSV with `# `-prefixed metadata; only the generated_at line varies
    /// between identically-configured runs.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# laglab-report: {}\n", self.kind));
        out.push_str(&format!("# generated_at: {}\n", self.meta.generated_at_unix));
        out.push_str(&format!("# seed: {}\n", self.meta.seed));
        out.push_str(&format!("# trunc_k: {}\n", self.meta.trunc_k));
        out.push_str(&format!("# trials: {}\n", self.meta.trials));
        out.push_str(&format!("# tol: {:?}\n", self.meta.tol));
        for (k, v) in &self.params {
            out.push_str(&format!("# param {k}: {}\n", fmt_value(v)));
        }
        for (k, v) in &self.diagnostics {
            out.push_str(&format!("# diag {k}: {}\n", fmt_value(v)));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(fmt_value).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => self.to_json(),
        }
    }

    pub fn write_to(&self, path: &Path, format: ReportFormat) -> Result<()> {
        let mut file = std::fs::File::create(path)
            .map_err(|e| Error::Report(format!("cannot create {}: {e}", path.display())))?;
        file.write_all(self.render(format).as_bytes())
            .map_err(|e| Error::Report(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}

/// Strip the timestamp line, for byte-level reproducibility comparisons.
pub fn strip_timestamp(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with("# generated_at:"))
        .collect::<Vec<_>>()
        .join("\n")
}
