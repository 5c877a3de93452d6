//! Bagged random forest over CART classification trees.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_classification_tree, TreeParams};
use super::{class_prior, rng_stream_seed, EnsembleModel, ModelError, ModelKind, ModelParams, TrainMeta};
use crate::data::FeatureTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteMode {
    /// Fraction of trees whose leaf positive-fraction exceeds 0.5
    /// (a tie at exactly 0.5 counts half a vote).
    HardVote,
    /// Mean leaf positive fraction across trees.
    LeafProb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features considered per split; defaults to ceil(sqrt(d)) when unset.
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub vote_mode: VoteMode,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 500,
            mtry: None,
            min_leaf: 1,
            max_depth: None,
            bootstrap: true,
            vote_mode: VoteMode::HardVote,
        }
    }
}

/// Fit a bagged forest. Each tree trains on a bootstrap resample of size n
/// drawn with a per-tree RNG stream derived from `(seed, tree_index)`, so the
/// result is independent of the parallel schedule. Rows are canonicalized by
/// row key first, making the fit invariant to input row order.
pub fn fit_forest(table: &FeatureTable, params: &ForestParams, seed: u64) -> Result<EnsembleModel, ModelError> {
    if table.n_rows() == 0 {
        return Err(ModelError::EmptyTable);
    }
    let (neg, pos) = table.class_counts();
    if neg == 0 || pos == 0 {
        return Err(ModelError::DegenerateClass);
    }

    let mut order: Vec<usize> = (0..table.n_rows()).collect();
    order.sort_by(|&a, &b| table.row_keys[a].cmp(&table.row_keys[b]));
    let rows: Vec<Vec<f64>> = order.iter().map(|&i| table.rows[i].clone()).collect();
    let labels: Vec<u8> = order.iter().map(|&i| table.labels[i]).collect();

    let n = rows.len();
    let d = table.n_cols();
    let tree_params = TreeParams {
        mtry: params.mtry.unwrap_or_else(|| (d as f64).sqrt().ceil() as usize),
        min_leaf: params.min_leaf,
        max_depth: params.max_depth,
    };

    let trees: Vec<_> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_stream_seed(seed, t as u64));
            let bag: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            fit_classification_tree(&rows, &labels, &bag, &tree_params, &mut rng)
        })
        .collect();

    Ok(EnsembleModel {
        kind: ModelKind::RandomForest,
        trees,
        column_schema: table.schema.clone(),
        params: ModelParams::Forest(*params),
        train_meta: TrainMeta {
            seed,
            n_train: n,
            class_prior: class_prior(&labels),
            balance_method: "none".to_string(),
            round_losses: Vec::new(),
        },
        base_score: 0.0,
    })
}
