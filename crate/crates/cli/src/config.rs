//! Run configuration: a single JSON document that pins every input, seed,
//! and hyperparameter, so a run is reproducible from the file alone.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use xg_core::balance::{BalanceConfig, BalanceMethod};
use xg_core::model::{ForestParams, GbtParams, VoteMode};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub balance: BalanceSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub metrics: MetricsSection,
    #[serde(default)]
    pub profiles: ProfilesSection,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// Shot CSV in the canonical 15-column layout.
    pub csv: PathBuf,
    /// Abort on the first malformed row instead of skipping it.
    #[serde(default)]
    pub strict: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            test_fraction: 0.2,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BalanceSection {
    /// none | under | over_duplicate | over_smoothed
    pub method: String,
    pub target_minority_fraction: f64,
    pub seed: u64,
    pub bandwidth_scale: f64,
}

impl Default for BalanceSection {
    fn default() -> Self {
        BalanceSection {
            method: "none".to_string(),
            target_minority_fraction: 0.5,
            seed: 7,
            bandwidth_scale: 1.0,
        }
    }
}

impl BalanceSection {
    pub fn to_core(&self) -> Result<BalanceConfig, CliError> {
        let method = BalanceMethod::parse(&self.method)
            .ok_or_else(|| CliError::Validation(format!("unknown balance method {:?}", self.method)))?;
        Ok(BalanceConfig {
            method,
            target_minority_fraction: self.target_minority_fraction,
            seed: self.seed,
            bandwidth_scale: self.bandwidth_scale,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// forest | gbt
    pub kind: String,
    pub seed: u64,
    // forest knobs
    pub n_trees: usize,
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    /// hard_vote | leaf_prob
    pub vote_mode: String,
    // gbt knobs
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub subsample: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            kind: "forest".to_string(),
            seed: 1,
            n_trees: 100,
            mtry: None,
            min_leaf: 1,
            max_depth: None,
            vote_mode: "hard_vote".to_string(),
            n_rounds: 100,
            learning_rate: 0.1,
            subsample: 1.0,
        }
    }
}

pub enum ModelSpec {
    Forest(ForestParams),
    Gbt(GbtParams),
}

impl ModelSection {
    pub fn to_spec(&self) -> Result<ModelSpec, CliError> {
        match self.kind.as_str() {
            "forest" => {
                let vote_mode = match self.vote_mode.as_str() {
                    "hard_vote" => VoteMode::HardVote,
                    "leaf_prob" => VoteMode::LeafProb,
                    other => {
                        return Err(CliError::Validation(format!("unknown vote mode {other:?}")));
                    }
                };
                Ok(ModelSpec::Forest(ForestParams {
                    n_trees: self.n_trees,
                    mtry: self.mtry,
                    min_leaf: self.min_leaf,
                    max_depth: self.max_depth,
                    bootstrap: true,
                    vote_mode,
                }))
            }
            "gbt" => Ok(ModelSpec::Gbt(GbtParams {
                n_rounds: self.n_rounds,
                learning_rate: self.learning_rate,
                max_depth: self.max_depth.unwrap_or(6),
                min_leaf: self.min_leaf.max(1),
                subsample: self.subsample,
            })),
            other => Err(CliError::Validation(format!("unknown model kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    pub threshold: f64,
}

impl Default for MetricsSection {
    fn default() -> Self {
        MetricsSection { threshold: 0.5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilesSection {
    /// Continuous column names or categorical sources to profile.
    pub features: Vec<String>,
    /// Grid resolution for continuous features.
    pub m: usize,
}

impl Default for ProfilesSection {
    fn default() -> Self {
        ProfilesSection {
            features: vec!["distance_to_goal".to_string(), "angle_to_goal".to_string()],
            m: 101,
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let config: RunConfig = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Validation(format!("invalid config {}: {e}", path.display())))?;
    validate(&config)?;
    Ok(config)
}

fn validate(config: &RunConfig) -> Result<(), CliError> {
    if !config.data.csv.exists() {
        return Err(CliError::Validation(format!(
            "data csv not found: {}",
            config.data.csv.display()
        )));
    }
    if !(0.0 < config.split.test_fraction && config.split.test_fraction < 1.0) {
        return Err(CliError::Validation(format!(
            "split.test_fraction must be in (0, 1), got {}",
            config.split.test_fraction
        )));
    }
    if !(0.0 < config.balance.target_minority_fraction && config.balance.target_minority_fraction <= 0.5) {
        return Err(CliError::Validation(format!(
            "balance.target_minority_fraction must be in (0, 0.5], got {}",
            config.balance.target_minority_fraction
        )));
    }
    if !(0.0..=1.0).contains(&config.metrics.threshold) {
        return Err(CliError::Validation(format!(
            "metrics.threshold must be in [0, 1], got {}",
            config.metrics.threshold
        )));
    }
    if config.profiles.m < 2 {
        return Err(CliError::Validation("profiles.m must be at least 2".to_string()));
    }
    // surface enum typos at validation time, not mid-pipeline
    config.balance.to_core()?;
    config.model.to_spec()?;
    Ok(())
}

pub fn hex_sha256(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
