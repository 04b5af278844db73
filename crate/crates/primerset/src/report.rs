//! Solution reports: JSON documents describing a primer selection or a
//! multi-colored subgraph cover, plus a flat CSV rendering of the former.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv: {0}")]
    CsvUtf8(#[from] csv::IntoInnerError<csv::Writer<Vec<u8>>>),
    #[error("csv: output is not utf-8")]
    Utf8(#[from] std::string::FromUtf8Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportParameters {
    pub n: u32,
    pub l: u32,
    pub k: u32,
    pub delta: u64,
}

/// One target's evidence that the selection amplifies it: a forward primer
/// hybridizing at `t`, a reverse primer at `t_prime`, with `t + t_prime >=
/// L`. `satisfying_pairs` counts the distinct unordered primer pairs from
/// the selection that work for this target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub target_id: u32,
    pub forward_primer: String,
    pub t: u32,
    pub reverse_primer: String,
    pub t_prime: u32,
    pub amplicon_length: i64,
    pub satisfying_pairs: u64,
}

/// The full result of one solver run. Every field except `seconds` is a
/// deterministic function of the instance, algorithm, and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub algorithm: String,
    pub parameters: ReportParameters,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub seed: Option<u64>,
    pub instance_sha256: String,
    /// Selected primers in selection order.
    pub primers: Vec<String>,
    pub count: usize,
    pub witnesses: Vec<Witness>,
    pub seconds: f64,
}

impl SolutionReport {
    pub fn to_json(&self) -> Result<String, ReportError> {
        let mut out = serde_json::to_string_pretty(self)?;
        out.push('\n');
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        Ok(serde_json::from_str(text)?)
    }

    /// One row per witness plus a trailing summary row, all under one
    /// header. Witness rows leave the summary columns blank and vice versa.
    pub fn to_csv(&self) -> Result<String, ReportError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "record",
            "algorithm",
            "target_id",
            "forward_primer",
            "t",
            "reverse_primer",
            "t_prime",
            "amplicon_length",
            "satisfying_pairs",
            "count",
            "seconds",
        ])?;
        for wit in &self.witnesses {
            w.write_record([
                "witness",
                &self.algorithm,
                &wit.target_id.to_string(),
                &wit.forward_primer,
                &wit.t.to_string(),
                &wit.reverse_primer,
                &wit.t_prime.to_string(),
                &wit.amplicon_length.to_string(),
                &wit.satisfying_pairs.to_string(),
                "",
                "",
            ])?;
        }
        w.write_record([
            "summary",
            &self.algorithm,
            "",
            "",
            "",
            "",
            "",
            "",
            "",
            &self.count.to_string(),
            &format!("{:.6}", self.seconds),
        ])?;
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

/// The result of a multi-colored subgraph run. Instance-derived fields
/// (`parameters`, `instance_sha256`, `primers`) are absent when the input
/// was a bare graph dump; rounding fields (`rounds` through
/// `unpruned_size`) are absent for the trivial solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsReport {
    pub algorithm: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub parameters: Option<ReportParameters>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub instance_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub seed: Option<u64>,
    pub n_vertices: u32,
    pub n_edges: usize,
    pub n_classes: usize,
    /// Selected vertices ascending; with `primers`, vertex `v` is the
    /// candidate `primers[v]`.
    pub vertices: Vec<u32>,
    pub count: usize,
    /// One covering edge id per class.
    pub witness_edges: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub primers: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub lp_objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub unpruned_size: Option<usize>,
    pub seconds: f64,
}

impl McsReport {
    pub fn to_json(&self) -> Result<String, ReportError> {
        let mut out = serde_json::to_string_pretty(self)?;
        out.push('\n');
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        Ok(serde_json::from_str(text)?)
    }
}
