//! Experiment reports: deterministic result rows with provenance labels,
//! JSON documents plus CSV row dumps, and content hashing of the artifacts
//! a run depended on.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constants::pinned_block;

/// One numeric result with its bound and provenance mode.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub metric: f64,
    pub bound: f64,
    pub pass: bool,
    /// exact | sampled(n) | heuristic | structural
    pub mode: String,
}

impl ReportRow {
    pub fn new(label: impl Into<String>, metric: f64, bound: f64, pass: bool, mode: &str) -> Self {
        ReportRow { label: label.into(), metric, bound, pass, mode: mode.into() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub kind: String,
    pub config_echo: String,
    /// SHA-256 over every serialized artifact the run used.
    pub content_hash: String,
    pub pinned_constants: Vec<(String, f64)>,
    pub rows: Vec<ReportRow>,
    pub pass: bool,
    pub wall_ms: u128,
    pub shards: usize,
}

impl ExperimentReport {
    pub fn new(
        experiment: impl Into<String>,
        kind: impl Into<String>,
        config_echo: String,
        artifacts: &[serde_json::Value],
        rows: Vec<ReportRow>,
        wall_ms: u128,
        shards: usize,
    ) -> Self {
        let mut hasher = Sha256::new();
        for a in artifacts {
            hasher.update(a.to_string().as_bytes());
        }
        let digest = hasher.finalize();
        let content_hash: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        let pass = rows.iter().all(|r| r.pass);
        ExperimentReport {
            experiment: experiment.into(),
            kind: kind.into(),
            config_echo,
            content_hash,
            pinned_constants: pinned_block()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            rows,
            pass,
            wall_ms,
            shards,
        }
    }

    /// Rows as CSV; verdicts come only from rows present here.
    pub fn rows_csv(&self) -> String {
        let mut out = String::from("label,metric,bound,pass,mode\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.label.replace(',', ";"),
                r.metric,
                r.bound,
                r.pass,
                r.mode
            ));
        }
        out
    }
}

/// The measurement CSV schema used by extractor experiments.
pub fn measurement_csv_header() -> &'static str {
    "source_id,extractor_id,mode,distance,floor,declared_eps,pass\n"
}

pub fn measurement_csv_row(
    source_id: &str,
    extractor_id: &str,
    mode: &str,
    distance: f64,
    floor: f64,
    declared_eps: f64,
    pass: bool,
) -> String {
    format!("{source_id},{extractor_id},{mode},{distance},{floor},{declared_eps},{pass}\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_hash_is_deterministic_and_sensitive() {
        let art = vec![serde_json::json!({"a": 1})];
        let rows = vec![ReportRow::new("x", 0.1, 0.5, true, "exact")];
        let r1 = ExperimentReport::new("e", "k", "cfg".into(), &art, rows.clone(), 0, 1);
        let r2 = ExperimentReport::new("e", "k", "cfg".into(), &art, rows.clone(), 9, 1);
        assert_eq!(r1.content_hash, r2.content_hash);
        let art2 = vec![serde_json::json!({"a": 2})];
        let r3 = ExperimentReport::new("e", "k", "cfg".into(), &art2, rows, 0, 1);
        assert_ne!(r1.content_hash, r3.content_hash);
        assert!(r1.pass);
    }

    #[test]
    fn failing_row_fails_report() {
        let rows = vec![
            ReportRow::new("ok", 0.1, 0.5, true, "exact"),
            ReportRow::new("bad", 0.9, 0.5, false, "exact"),
        ];
        let r = ExperimentReport::new("e", "k", String::new(), &[], rows, 0, 1);
        assert!(!r.pass);
    }
}
