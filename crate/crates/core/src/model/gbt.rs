//! Gradient-boosted trees with logistic loss. The additive model starts at
//! the log-odds of the class prior; each round fits a regression tree to the
//! negative gradient and takes a learning-rate-scaled Newton step per leaf.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{fit_regression_tree, TreeNode};
use super::{class_prior, rng_stream_seed, EnsembleModel, ModelError, ModelKind, ModelParams, TrainMeta};
use crate::data::FeatureTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub subsample: f64,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_rounds: 100,
            learning_rate: 0.1,
            max_depth: 6,
            min_leaf: 20,
            subsample: 1.0,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn log_loss(scores: &[f64], labels: &[u8]) -> f64 {
    let eps = 1e-15;
    scores
        .iter()
        .zip(labels)
        .map(|(&s, &y)| {
            let p = sigmoid(s).clamp(eps, 1.0 - eps);
            if y == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum::<f64>()
        / labels.len() as f64
}

/// Scale every leaf value of a fitted tree by the learning rate so stored
/// trees carry their final additive contribution.
fn scale_leaves(node: &mut TreeNode, eta: f64) {
    match node {
        TreeNode::Leaf { value, .. } => *value *= eta,
        TreeNode::Split { left, right, .. } => {
            scale_leaves(left, eta);
            scale_leaves(right, eta);
        }
    }
}

pub fn fit_gbt(table: &FeatureTable, params: &GbtParams, seed: u64) -> Result<EnsembleModel, ModelError> {
    if table.n_rows() == 0 {
        return Err(ModelError::EmptyTable);
    }
    let (neg, pos) = table.class_counts();
    if neg == 0 || pos == 0 {
        return Err(ModelError::DegenerateClass);
    }
    assert!(
        params.learning_rate >= 0.0 && params.learning_rate <= 1.0,
        "learning_rate must be in [0, 1]"
    );

    let mut order: Vec<usize> = (0..table.n_rows()).collect();
    order.sort_by(|&a, &b| table.row_keys[a].cmp(&table.row_keys[b]));
    let rows: Vec<Vec<f64>> = order.iter().map(|&i| table.rows[i].clone()).collect();
    let labels: Vec<u8> = order.iter().map(|&i| table.labels[i]).collect();

    let n = rows.len();
    let prior = class_prior(&labels).clamp(1e-6, 1.0 - 1e-6);
    let base_score = (prior / (1.0 - prior)).ln();
    let mut scores = vec![base_score; n];
    let mut round_losses = vec![log_loss(&scores, &labels)];

    let mut trees = Vec::with_capacity(params.n_rounds);
    for m in 0..params.n_rounds {
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n];
        for i in 0..n {
            let p = sigmoid(scores[i]);
            grad[i] = f64::from(labels[i]) - p;
            hess[i] = (p * (1.0 - p)).max(1e-12);
        }

        let indices: Vec<usize> = if params.subsample < 1.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_stream_seed(seed, m as u64));
            let k = ((n as f64) * params.subsample).round().max(1.0) as usize;
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(&mut rng);
            all.truncate(k);
            all.sort_unstable();
            all
        } else {
            (0..n).collect()
        };

        let mut tree = fit_regression_tree(&rows, &grad, &hess, &indices, params.max_depth, params.min_leaf);
        scale_leaves(&mut tree, params.learning_rate);
        for i in 0..n {
            scores[i] += tree.predict(&rows[i]);
        }
        round_losses.push(log_loss(&scores, &labels));
        trees.push(tree);
    }

    Ok(EnsembleModel {
        kind: ModelKind::Gbt,
        trees,
        column_schema: table.schema.clone(),
        params: ModelParams::Gbt(*params),
        train_meta: TrainMeta {
            seed,
            n_train: n,
            class_prior: prior,
            balance_method: "none".to_string(),
            round_losses,
        },
        base_score,
    })
}
