//! Tree-ensemble binary classifiers producing goal probabilities.

mod forest;
mod gbt;
mod persist;
mod tree;

pub use forest::{fit_forest, ForestParams, VoteMode};
pub use gbt::{fit_gbt, GbtParams};
pub use persist::{load_model, save_model, FORMAT_VERSION};
pub use tree::{fit_classification_tree, fit_regression_tree, TreeNode, TreeParams};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{FeatureSchema, FeatureTable};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("both classes must be present in the training data")]
    DegenerateClass,
    #[error("training table is empty")]
    EmptyTable,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("model format version {found} not supported (expected {expected})")]
    SchemaVersionMismatch { found: u32, expected: u32 },
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    RandomForest,
    Gbt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelParams {
    Forest(ForestParams),
    Gbt(GbtParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub seed: u64,
    pub n_train: usize,
    pub class_prior: f64,
    pub balance_method: String,
    /// For boosted models: training log-loss per round (index 0 = prior only).
    #[serde(default)]
    pub round_losses: Vec<f64>,
}

/// An immutable, serializable trained ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub kind: ModelKind,
    pub trees: Vec<TreeNode>,
    pub column_schema: FeatureSchema,
    pub params: ModelParams,
    pub train_meta: TrainMeta,
    /// Additive base score (log-odds of the class prior) for boosted models.
    pub base_score: f64,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl EnsembleModel {
    pub fn check_schema(&self, schema: &FeatureSchema) -> Result<(), ModelError> {
        if *schema != self.column_schema {
            return Err(ModelError::SchemaMismatch(
                "feature table columns do not match the model's training schema".to_string(),
            ));
        }
        Ok(())
    }

    /// Probability for a single encoded row (no schema check).
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self.kind {
            ModelKind::RandomForest => {
                let vote_mode = match &self.params {
                    ModelParams::Forest(p) => p.vote_mode,
                    ModelParams::Gbt(_) => VoteMode::HardVote,
                };
                let n = self.trees.len() as f64;
                match vote_mode {
                    VoteMode::HardVote => {
                        let votes: f64 = self
                            .trees
                            .iter()
                            .map(|t| {
                                let p = t.predict(row);
                                if p > 0.5 {
                                    1.0
                                } else if p == 0.5 {
                                    0.5
                                } else {
                                    0.0
                                }
                            })
                            .sum();
                        votes / n
                    }
                    VoteMode::LeafProb => {
                        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / n
                    }
                }
            }
            ModelKind::Gbt => {
                let score: f64 =
                    self.base_score + self.trees.iter().map(|t| t.predict(row)).sum::<f64>();
                sigmoid(score)
            }
        }
    }

    /// Probabilities for every row of a table encoded against this model's schema.
    pub fn predict_proba(&self, table: &FeatureTable) -> Result<Vec<f64>, ModelError> {
        self.check_schema(&table.schema)?;
        Ok(table.rows.iter().map(|r| self.predict_row(r)).collect())
    }
}

pub(crate) fn class_prior(labels: &[u8]) -> f64 {
    labels.iter().filter(|&&l| l == 1).count() as f64 / labels.len() as f64
}

pub(crate) fn rng_stream_seed(seed: u64, index: u64) -> u64 {
    // splitmix-style mixing so per-tree streams are decorrelated
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
pub(crate) mod testutil {
    use crate::data::{derive_features, encode_features, FeatureTable, Partition};
    use crate::synthetic::{generate_shots, SyntheticConfig};

    /// Encoded synthetic table with labels from the logistic ground truth.
    pub fn synthetic_table(n: usize, seed: u64) -> FeatureTable {
        let shots = generate_shots(&SyntheticConfig {
            n,
            seed,
            ..SyntheticConfig::default()
        });
        let records: Vec<_> = shots.iter().map(|s| s.record.clone()).collect();
        let enriched = derive_features(&records).unwrap();
        let mut t = encode_features(&enriched, None).unwrap();
        t.partition = Partition::Train;
        t
    }
}
