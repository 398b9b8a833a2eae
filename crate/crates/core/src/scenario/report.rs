use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Overrides;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub terms: BTreeMap<String, f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum Line<'a> {
    Check(&'a CheckRecord),
    Summary {
        scenario: &'a str,
        digest: &'a str,
        overall_pass: bool,
    },
}

/// All check records of a run plus the summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario: String,
    pub digest: String,
    pub records: Vec<CheckRecord>,
    pub overall_pass: bool,
}

impl RunReport {
    /// One JSON object per line: the checks sorted by id, then the summary.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(&Line::Check(r)).expect("records serialize"));
            out.push('\n');
        }
        let summary = Line::Summary {
            scenario: &self.scenario,
            digest: &self.digest,
            overall_pass: self.overall_pass,
        };
        out.push_str(&serde_json::to_string(&summary).expect("summary serializes"));
        out.push('\n');
        out
    }
}

/// SHA-256 of the scenario text followed by the canonical overrides.
pub fn digest(text: &str, overrides: &Overrides) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    h.update(overrides.canonical().as_bytes());
    h.finalize()
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}
