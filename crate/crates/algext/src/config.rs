//! Plain-text experiment configs: `key = value` lines under section
//! headers, one experiment per file. The format is deliberately diffable in
//! version control.
//!
//! ```text
//! [experiment]
//! kind = weil-check
//! check = deligne
//! rng_seed = 171
//!
//! [params]
//! fields = 101,1009
//!
//! [budgets]
//! enumeration = 1073741824
//! dft = 16777216
//! ```
//!
//! The environment variable `ALGEXT_BUDGET_OVERRIDE` scales the enumeration
//! and DFT budgets by a float factor for CI downscaling; it never changes a
//! criterion's tolerances.

use std::collections::BTreeMap;
use std::path::Path;

use crate::constants::{DEFAULT_DFT_BUDGET, DEFAULT_ENUM_BUDGET};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct Budgets {
    pub enumeration: u64,
    pub dft: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { enumeration: DEFAULT_ENUM_BUDGET, dft: DEFAULT_DFT_BUDGET }
    }
}

impl Budgets {
    /// Apply the CI override factor, if set.
    pub fn with_env_override(mut self) -> Self {
        if let Ok(v) = std::env::var("ALGEXT_BUDGET_OVERRIDE") {
            if let Ok(f) = v.trim().parse::<f64>() {
                if f > 0.0 {
                    self.enumeration = ((self.enumeration as f64) * f).max(1.0) as u64;
                    self.dft = ((self.dft as f64) * f).max(1.0) as u64;
                }
            }
        }
        self
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: String,
    pub check: Option<String>,
    pub rng_seed: Option<u64>,
    pub shards: usize,
    pub params: BTreeMap<String, String>,
    pub budgets: Budgets,
    pub output_dir: Option<String>,
    /// Verbatim config text, echoed into the report.
    pub echo: String,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut section = String::new();
        let mut experiment: BTreeMap<String, String> = BTreeMap::new();
        let mut params: BTreeMap<String, String> = BTreeMap::new();
        let mut budgets_kv: BTreeMap<String, String> = BTreeMap::new();
        let mut output: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::ConfigError(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            match section.as_str() {
                "experiment" => experiment.insert(k, v),
                "params" => params.insert(k, v),
                "budgets" => budgets_kv.insert(k, v),
                "output" => output.insert(k, v),
                other => {
                    return Err(Error::ConfigError(format!("unknown section [{other}]")));
                }
            };
        }
        let kind = experiment
            .remove("kind")
            .ok_or_else(|| Error::ConfigError("missing [experiment] kind".into()))?;
        let rng_seed = match experiment.remove("rng_seed") {
            Some(s) => Some(
                s.parse::<u64>()
                    .map_err(|_| Error::ConfigError(format!("bad rng_seed `{s}`")))?,
            ),
            None => None,
        };
        let shards = match experiment.remove("shards") {
            Some(s) => s
                .parse::<usize>()
                .ok()
                .filter(|&v| v >= 1)
                .ok_or_else(|| Error::ConfigError(format!("bad shards `{s}`")))?,
            None => 1,
        };
        let mut budgets = Budgets::default();
        if let Some(s) = budgets_kv.get("enumeration") {
            budgets.enumeration = s
                .parse::<u64>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| Error::ConfigError(format!("bad enumeration budget `{s}`")))?;
        }
        if let Some(s) = budgets_kv.get("dft") {
            budgets.dft = s
                .parse::<u64>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| Error::ConfigError(format!("bad dft budget `{s}`")))?;
        }
        Ok(ExperimentConfig {
            kind,
            check: experiment.remove("check"),
            rng_seed,
            shards,
            params,
            budgets: budgets.with_env_override(),
            output_dir: output.get("dir").cloned(),
            echo: text.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(|s| s.as_str())
    }

    pub fn param_u64(&self, key: &str) -> Result<Option<u64>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<u64>()
                .map(Some)
                .map_err(|_| Error::ConfigError(format!("bad integer for `{key}`: `{s}`"))),
        }
    }

    pub fn param_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::ConfigError(format!("bad float for `{key}`: `{s}`"))),
        }
    }

    /// The seed is mandatory for any sampled mode.
    pub fn require_seed(&self) -> Result<u64> {
        self.rng_seed
            .ok_or_else(|| Error::ConfigError("rng_seed is mandatory for sampled modes".into()))
    }
}
