//! Evaluation config file: TOML with key = value pairs and sections.

use crate::scoring::QoeCoefficients;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessConfig {
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default = "default_samples")]
    pub user_samples: u32,
    #[serde(default = "default_baseline")]
    pub baseline: String,
    /// Worker threads; flag and environment take precedence.
    pub workers: Option<usize>,
    #[serde(default)]
    pub qoe: QoeSection,
    #[serde(default)]
    pub thresholds: ThresholdSection,
    pub input: InputSection,
    #[serde(default, rename = "sequence")]
    pub sequences: Vec<SequenceSpec>,
    #[serde(rename = "algorithm")]
    pub algorithms: Vec<AlgorithmSpec>,
}

fn default_seed() -> u64 {
    42
}

fn default_samples() -> u32 {
    50
}

fn default_baseline() -> String {
    "no_prefetch".into()
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QoeSection {
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "beta_default")]
    pub beta: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "theta_default")]
    pub theta: f64,
}

fn one() -> f64 {
    1.0
}

fn beta_default() -> f64 {
    1.85
}

fn theta_default() -> f64 {
    0.5
}

impl Default for QoeSection {
    fn default() -> Self {
        let c = QoeCoefficients::default();
        Self {
            alpha: c.alpha,
            beta: c.beta,
            gamma: c.gamma,
            theta: c.theta,
        }
    }
}

impl From<QoeSection> for QoeCoefficients {
    fn from(s: QoeSection) -> Self {
        Self {
            alpha: s.alpha,
            beta: s.beta,
            gamma: s.gamma,
            theta: s.theta,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    #[serde(default = "low_cut")]
    pub low: f64,
    #[serde(default = "high_cut")]
    pub high: f64,
}

fn low_cut() -> f64 {
    1.5
}

fn high_cut() -> f64 {
    3.0
}

impl Default for ThresholdSection {
    fn default() -> Self {
        Self {
            low: low_cut(),
            high: high_cut(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    /// Directory of `*.txt` network traces.
    pub network_dir: Option<PathBuf>,
    /// Explicit network trace files (in addition to the directory).
    #[serde(default)]
    pub network_files: Vec<PathBuf>,
    /// Video manifest JSON.
    pub manifest: PathBuf,
}

/// An ordered list of manifest video names under a sequence id.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    pub id: String,
    pub videos: Vec<String>,
}

/// An algorithm to evaluate, with free-form parameters.
#[derive(Debug, Clone, Deserialize)]
pub struct AlgorithmSpec {
    pub name: String,
    /// Reported name; defaults to `name`. Lets one policy family appear
    /// twice with different parameters.
    pub label: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, toml::Value>,
}

impl AlgorithmSpec {
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }

    /// Parameters as plain strings for [`crate::AlgorithmContext`].
    pub fn string_params(&self) -> BTreeMap<String, String> {
        self.params
            .iter()
            .map(|(k, v)| {
                let s = match v {
                    toml::Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                (k.clone(), s)
            })
            .collect()
    }
}

impl HarnessConfig {
    pub fn from_str(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let text = r#"
master_seed = 7
user_samples = 5
baseline = "no_prefetch"

[qoe]
alpha = 1.0
beta = 1.85
gamma = 1.0
theta = 0.5

[thresholds]
low = 1.9
high = 3.0

[input]
network_dir = "nets"
manifest = "videos/manifest.json"

[[sequence]]
id = "main"
videos = ["tj", "EDG"]

[[algorithm]]
name = "no_prefetch"

[[algorithm]]
name = "threshold"
label = "threshold_tight"
[algorithm.params]
low_ms = 800
safety = 0.85
"#;
        let config = HarnessConfig::from_str(text).unwrap();
        assert_eq!(config.master_seed, 7);
        assert_eq!(config.thresholds.low, 1.9);
        assert_eq!(config.sequences[0].videos, vec!["tj", "EDG"]);
        assert_eq!(config.algorithms[1].label(), "threshold_tight");
        let params = config.algorithms[1].string_params();
        assert_eq!(params["low_ms"], "800");
        assert_eq!(params["safety"], "0.85");
    }

    #[test]
    fn defaults_fill_optional_sections() {
        let text = r#"
[input]
manifest = "m.json"

[[algorithm]]
name = "no_prefetch"
"#;
        let config = HarnessConfig::from_str(text).unwrap();
        assert_eq!(config.master_seed, 42);
        assert_eq!(config.user_samples, 50);
        assert_eq!(config.baseline, "no_prefetch");
        assert_eq!(config.qoe.beta, 1.85);
    }
}
