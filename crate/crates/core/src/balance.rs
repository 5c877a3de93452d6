//! Class rebalancing for the training partition: random under-sampling,
//! duplication over-sampling, and smoothed-bootstrap over-sampling that
//! jitters continuous columns of resampled minority rows with a per-column
//! Silverman-style bandwidth.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::FeatureTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceMethod {
    None,
    Under,
    OverDuplicate,
    OverSmoothed,
}

impl BalanceMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BalanceMethod::None => "none",
            BalanceMethod::Under => "under",
            BalanceMethod::OverDuplicate => "over_duplicate",
            BalanceMethod::OverSmoothed => "over_smoothed",
        }
    }

    pub fn parse(s: &str) -> Option<BalanceMethod> {
        match s {
            "none" => Some(BalanceMethod::None),
            "under" => Some(BalanceMethod::Under),
            "over_duplicate" => Some(BalanceMethod::OverDuplicate),
            "over_smoothed" => Some(BalanceMethod::OverSmoothed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalanceConfig {
    pub method: BalanceMethod,
    pub target_minority_fraction: f64,
    pub seed: u64,
    pub bandwidth_scale: f64,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        BalanceConfig {
            method: BalanceMethod::None,
            target_minority_fraction: 0.5,
            seed: 0,
            bandwidth_scale: 1.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum BalanceError {
    #[error("both classes must be present with at least 2 rows each")]
    DegenerateClass,
    #[error("target_minority_fraction must be in (0, 0.5], got {0}")]
    BadTargetFraction(f64),
}

fn class_indices(table: &FeatureTable) -> Result<(Vec<usize>, Vec<usize>), BalanceError> {
    let pos: Vec<usize> = (0..table.n_rows()).filter(|&i| table.labels[i] == 1).collect();
    let neg: Vec<usize> = (0..table.n_rows()).filter(|&i| table.labels[i] == 0).collect();
    if pos.len() < 2 || neg.len() < 2 {
        return Err(BalanceError::DegenerateClass);
    }
    Ok((neg, pos))
}

fn check_cfg(cfg: &BalanceConfig) -> Result<(), BalanceError> {
    if !(cfg.target_minority_fraction > 0.0 && cfg.target_minority_fraction <= 0.5) {
        return Err(BalanceError::BadTargetFraction(cfg.target_minority_fraction));
    }
    Ok(())
}

/// Dispatch to the configured method. `BalanceMethod::None` clones the input.
pub fn rebalance(train: &FeatureTable, cfg: &BalanceConfig) -> Result<FeatureTable, BalanceError> {
    match cfg.method {
        BalanceMethod::None => Ok(train.clone()),
        BalanceMethod::Under => undersample(train, cfg),
        BalanceMethod::OverDuplicate => oversample_duplicate(train, cfg),
        BalanceMethod::OverSmoothed => oversample_smoothed(train, cfg),
    }
}

/// Drop majority rows (sampled without replacement) until the minority
/// fraction reaches the target; the minority class is untouched.
pub fn undersample(train: &FeatureTable, cfg: &BalanceConfig) -> Result<FeatureTable, BalanceError> {
    check_cfg(cfg)?;
    let (neg, pos) = class_indices(train)?;
    let (minority, majority) = if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) };
    let f = cfg.target_minority_fraction;
    let keep = ((minority.len() as f64) * (1.0 - f) / f).round() as usize;
    let keep = keep.min(majority.len());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut shuffled = majority;
    shuffled.shuffle(&mut rng);
    let mut indices: Vec<usize> = minority.into_iter().chain(shuffled.into_iter().take(keep)).collect();
    indices.sort_unstable();
    Ok(train.select(&indices, train.partition))
}

fn oversample_count(minority: usize, majority: usize, f: f64) -> usize {
    let target_minority = ((majority as f64) * f / (1.0 - f)).round() as usize;
    target_minority.saturating_sub(minority)
}

/// Append exact copies of minority rows (sampled with replacement) until the
/// minority fraction reaches the target.
pub fn oversample_duplicate(train: &FeatureTable, cfg: &BalanceConfig) -> Result<FeatureTable, BalanceError> {
    check_cfg(cfg)?;
    let (neg, pos) = class_indices(train)?;
    let (minority, majority) = if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) };
    let extra = oversample_count(minority.len(), majority.len(), cfg.target_minority_fraction);

    let mut out = train.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for k in 0..extra {
        let &src = minority.choose(&mut rng).expect("non-empty minority");
        out.rows.push(train.rows[src].clone());
        out.labels.push(train.labels[src]);
        out.row_keys.push(format!("{}#dup{k}", train.row_keys[src]));
        out.synthetic.push(true);
    }
    Ok(out)
}

/// Per-column smoothed-bootstrap bandwidth:
/// `sigma * (4 / ((d_cont + 2) * n_class)) ^ (1 / (d_cont + 4))`
/// where `sigma` is the class-conditional sample standard deviation.
pub fn silverman_bandwidth(column: &[f64], n_class: usize, d_cont: usize) -> f64 {
    assert!(n_class >= 2, "bandwidth needs at least 2 class rows");
    let n = column.len() as f64;
    let mean = column.iter().sum::<f64>() / n;
    let var = column.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let sigma = var.sqrt();
    let exponent = 1.0 / (d_cont as f64 + 4.0);
    sigma * (4.0 / ((d_cont as f64 + 2.0) * n_class as f64)).powf(exponent)
}

/// Append synthetic minority rows: each draws a seed minority row, jitters
/// its continuous columns with zero-mean Gaussian noise at the per-column
/// bandwidth (scaled by `bandwidth_scale`), copies one-hot columns verbatim,
/// and clips jittered values to the column's observed training range.
///
/// Synthetic rows use per-row RNG streams derived from (seed, row index), so
/// the output does not depend on evaluation order.
pub fn oversample_smoothed(train: &FeatureTable, cfg: &BalanceConfig) -> Result<FeatureTable, BalanceError> {
    check_cfg(cfg)?;
    let (neg, pos) = class_indices(train)?;
    let (minority, majority) = if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) };
    let extra = oversample_count(minority.len(), majority.len(), cfg.target_minority_fraction);

    let cont = train.schema.continuous_indices();
    let d_cont = cont.len();
    let mut bandwidths = Vec::with_capacity(d_cont);
    let mut ranges = Vec::with_capacity(d_cont);
    for &col in &cont {
        let values: Vec<f64> = minority.iter().map(|&i| train.rows[i][col]).collect();
        let h = silverman_bandwidth(&values, minority.len(), d_cont);
        if h == 0.0 {
            log::warn!(
                "zero variance in continuous column {}; smoothing degenerates to duplication there",
                train.schema.columns[col].name
            );
        }
        bandwidths.push(h * cfg.bandwidth_scale);
        ranges.push(train.column_range(col));
    }

    let mut out = train.clone();
    for k in 0..extra {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let &src = minority.choose(&mut rng).expect("non-empty minority");
        let mut row = train.rows[src].clone();
        for (j, &col) in cont.iter().enumerate() {
            if bandwidths[j] > 0.0 {
                let noise = Normal::new(0.0, bandwidths[j]).expect("positive bandwidth");
                let (lo, hi) = ranges[j];
                row[col] = (row[col] + noise.sample(&mut rng)).clamp(lo, hi);
            }
        }
        out.rows.push(row);
        out.labels.push(train.labels[src]);
        out.row_keys.push(format!("{}#syn{k}", train.row_keys[src]));
        out.synthetic.push(true);
    }
    Ok(out)
}
