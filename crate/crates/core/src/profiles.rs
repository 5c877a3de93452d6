//! Ceteris-paribus profiles, aggregated profiles over shot groups, and
//! partial-dependence profiles.
//!
//! A CP profile sweeps one feature of one observation over a grid and
//! records the model prediction at each point; an aggregated profile (AP)
//! is the pointwise mean of the CP profiles of a group of observations; the
//! PDP is the AP over the entire table. What-if queries reprice the average
//! per-shot xG by reading the AP curve at two feature values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{ColumnKind, FeatureTable};
use crate::model::EnsembleModel;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("unknown feature: {0}")]
    UnknownFeature(String),
    #[error("feature {0} is constant; no grid can be built")]
    ConstantFeature(String),
    #[error("group is empty")]
    EmptyGroup,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("value {value} outside the grid span [{lo}, {hi}]")]
    OutOfGrid { value: f64, lo: f64, hi: f64 },
    #[error("baseline profile value is zero; ratio undefined")]
    ZeroBaseline,
    #[error("what-if queries require a continuous grid")]
    NotContinuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPoints {
    Continuous(Vec<f64>),
    Categorical(Vec<String>),
}

impl GridPoints {
    pub fn len(&self) -> usize {
        match self {
            GridPoints::Continuous(v) => v.len(),
            GridPoints::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Grid of values for one feature. `feature` is a continuous column name or
/// a categorical source (e.g. "situation").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureGrid {
    pub feature: String,
    pub points: GridPoints,
}

/// Mean model predictions over a grid for k aggregated observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub feature: String,
    pub grid: FeatureGrid,
    pub values: Vec<f64>,
    pub k: usize,
    pub group_label: String,
}

/// Build a grid: `m` equidistant points over the observed range for a
/// continuous column; all training levels for a categorical source.
pub fn grid_for_feature(table: &FeatureTable, feature: &str, m: usize) -> Result<FeatureGrid, ProfileError> {
    if let Some(col) = table.schema.column_index(feature) {
        if table.schema.columns[col].kind == ColumnKind::Continuous {
            let (lo, hi) = table.column_range(col);
            if lo == hi {
                return Err(ProfileError::ConstantFeature(feature.to_string()));
            }
            let m = m.max(2);
            let points = (0..m)
                .map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64)
                .collect();
            return Ok(FeatureGrid {
                feature: feature.to_string(),
                points: GridPoints::Continuous(points),
            });
        }
    }
    // categorical source: enumerate training levels in schema order
    let levels: Vec<String> = table
        .schema
        .columns
        .iter()
        .filter(|c| c.kind == ColumnKind::Onehot && c.source == feature)
        .map(|c| c.name[feature.len() + 1..].to_string())
        .collect();
    if levels.is_empty() {
        return Err(ProfileError::UnknownFeature(feature.to_string()));
    }
    Ok(FeatureGrid {
        feature: feature.to_string(),
        points: GridPoints::Categorical(levels),
    })
}

enum FeatureTarget {
    Continuous(usize),
    Categorical(Vec<usize>), // column index per grid level, aligned with points
}

fn resolve_target(
    model: &EnsembleModel,
    grid: &FeatureGrid,
) -> Result<FeatureTarget, ProfileError> {
    match &grid.points {
        GridPoints::Continuous(_) => {
            let col = model
                .column_schema
                .column_index(&grid.feature)
                .ok_or_else(|| ProfileError::UnknownFeature(grid.feature.clone()))?;
            Ok(FeatureTarget::Continuous(col))
        }
        GridPoints::Categorical(levels) => {
            let cols = levels
                .iter()
                .map(|level| {
                    model
                        .column_schema
                        .column_index(&format!("{}={}", grid.feature, level))
                        .ok_or_else(|| ProfileError::UnknownFeature(format!("{}={}", grid.feature, level)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(FeatureTarget::Categorical(cols))
        }
    }
}

/// Predict a row with the grid's feature forced to grid point `i`. For a
/// categorical feature the whole one-hot group is rewritten so the
/// counterfactual row stays on the valid manifold.
fn predict_at(
    model: &EnsembleModel,
    row: &[f64],
    grid: &FeatureGrid,
    target: &FeatureTarget,
    point: usize,
    scratch: &mut Vec<f64>,
) -> f64 {
    scratch.clear();
    scratch.extend_from_slice(row);
    match (target, &grid.points) {
        (FeatureTarget::Continuous(col), GridPoints::Continuous(vals)) => {
            scratch[*col] = vals[point];
        }
        (FeatureTarget::Categorical(cols), GridPoints::Categorical(_)) => {
            for &c in cols {
                scratch[c] = 0.0;
            }
            scratch[cols[point]] = 1.0;
        }
        _ => unreachable!("grid/target kinds always agree"),
    }
    model.predict_row(scratch)
}

/// Ceteris-paribus profile of a single encoded observation (k = 1).
pub fn cp_profile(
    model: &EnsembleModel,
    observation: &[f64],
    grid: &FeatureGrid,
    group_label: &str,
) -> Result<ProfileCurve, ProfileError> {
    aggregate_profiles(model, std::slice::from_ref(&observation.to_vec()), grid, group_label)
}

/// Aggregated profile: pointwise mean of the CP profiles of `group`.
/// Parallelized over grid points; each point sums rows in index order, so
/// the result is schedule-independent.
pub fn aggregate_profiles(
    model: &EnsembleModel,
    group: &[Vec<f64>],
    grid: &FeatureGrid,
    group_label: &str,
) -> Result<ProfileCurve, ProfileError> {
    if group.is_empty() {
        return Err(ProfileError::EmptyGroup);
    }
    let target = resolve_target(model, grid)?;
    let k = group.len();
    let values: Vec<f64> = (0..grid.points.len())
        .into_par_iter()
        .map(|i| {
            let mut scratch = Vec::with_capacity(model.column_schema.len());
            let sum: f64 = group
                .iter()
                .map(|row| predict_at(model, row, grid, &target, i, &mut scratch))
                .sum();
            sum / k as f64
        })
        .collect();
    Ok(ProfileCurve {
        feature: grid.feature.clone(),
        grid: grid.clone(),
        values,
        k,
        group_label: group_label.to_string(),
    })
}

/// Partial-dependence profile: the aggregated profile over every row.
pub fn pdp(model: &EnsembleModel, table: &FeatureTable, grid: &FeatureGrid) -> Result<ProfileCurve, ProfileError> {
    model
        .check_schema(&table.schema)
        .map_err(|e| ProfileError::SchemaMismatch(e.to_string()))?;
    aggregate_profiles(model, &table.rows, grid, "ALL")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIf {
    pub feature: String,
    pub from_value: f64,
    pub to_value: f64,
    pub ap_from: f64,
    pub ap_to: f64,
    pub ratio: f64,
    pub percent_change: f64,
}

fn interpolate(points: &[f64], values: &[f64], x: f64) -> Result<f64, ProfileError> {
    let lo = points[0];
    let hi = points[points.len() - 1];
    if x < lo || x > hi {
        return Err(ProfileError::OutOfGrid { value: x, lo, hi });
    }
    let idx = points.partition_point(|&p| p <= x);
    if idx == 0 {
        return Ok(values[0]);
    }
    if idx == points.len() {
        return Ok(values[values.len() - 1]);
    }
    let (x0, x1) = (points[idx - 1], points[idx]);
    let (y0, y1) = (values[idx - 1], values[idx]);
    Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// Read the profile at two feature values (linear interpolation between
/// bracketing grid points) and report the repricing ratio.
pub fn what_if_ratio(curve: &ProfileCurve, from_value: f64, to_value: f64) -> Result<WhatIf, ProfileError> {
    let points = match &curve.grid.points {
        GridPoints::Continuous(p) => p,
        GridPoints::Categorical(_) => return Err(ProfileError::NotContinuous),
    };
    let ap_from = interpolate(points, &curve.values, from_value)?;
    let ap_to = interpolate(points, &curve.values, to_value)?;
    if ap_from == 0.0 {
        return Err(ProfileError::ZeroBaseline);
    }
    let ratio = ap_to / ap_from;
    Ok(WhatIf {
        feature: curve.feature.clone(),
        from_value,
        to_value,
        ap_from,
        ap_to,
        ratio,
        percent_change: 100.0 * (ratio - 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testutil::synthetic_table;
    use crate::model::{fit_forest, ForestParams, ModelKind, ModelParams, TrainMeta, TreeNode, VoteMode};

    fn constant_model(table: &FeatureTable, c: f64) -> EnsembleModel {
        EnsembleModel {
            kind: ModelKind::RandomForest,
            trees: vec![TreeNode::Leaf { value: c, n_samples: 1 }],
            column_schema: table.schema.clone(),
            params: ModelParams::Forest(ForestParams {
                vote_mode: VoteMode::LeafProb,
                ..ForestParams::default()
            }),
            train_meta: TrainMeta {
                seed: 0,
                n_train: 1,
                class_prior: c,
                balance_method: "none".into(),
                round_losses: vec![],
            },
            base_score: 0.0,
        }
    }

    #[test]
    fn grid_equidistant_and_endpoints() {
        let mut t = synthetic_table(50, 1);
        let col = t.schema.column_index("minute").unwrap();
        for (i, row) in t.rows.iter_mut().enumerate() {
            row[col] = (i % 11) as f64; // range [0, 10]
        }
        let g = grid_for_feature(&t, "minute", 11).unwrap();
        match g.points {
            GridPoints::Continuous(p) => {
                assert_eq!(p, (0..=10).map(f64::from).collect::<Vec<_>>());
            }
            _ => panic!("expected continuous grid"),
        }
        let g2 = grid_for_feature(&t, "minute", 2).unwrap();
        match g2.points {
            GridPoints::Continuous(p) => assert_eq!(p, vec![0.0, 10.0]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn categorical_grid_enumerates_levels() {
        let t = synthetic_table(500, 2);
        let g = grid_for_feature(&t, "situation", 101).unwrap();
        match &g.points {
            GridPoints::Categorical(levels) => {
                assert_eq!(levels.len(), 5);
                assert!(levels.contains(&"OpenPlay".to_string()));
                assert!(levels.contains(&"Penalty".to_string()));
            }
            _ => panic!("expected categorical grid"),
        }
    }

    #[test]
    fn unknown_and_constant_features_error() {
        let t = synthetic_table(50, 3);
        assert!(matches!(
            grid_for_feature(&t, "nope", 11),
            Err(ProfileError::UnknownFeature(_))
        ));
        let mut c = t.clone();
        let col = c.schema.column_index("minute").unwrap();
        for row in c.rows.iter_mut() {
            row[col] = 42.0;
        }
        assert!(matches!(
            grid_for_feature(&c, "minute", 11),
            Err(ProfileError::ConstantFeature(_))
        ));
    }

    #[test]
    fn constant_model_gives_flat_curve() {
        let t = synthetic_table(100, 4);
        let model = constant_model(&t, 0.37);
        let grid = grid_for_feature(&t, "distance_to_goal", 21).unwrap();
        let curve = pdp(&model, &t, &grid).unwrap();
        assert_eq!(curve.k, 100);
        assert_eq!(curve.group_label, "ALL");
        for v in curve.values {
            // mean of 100 identical summands accumulates rounding
            assert!((v - 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn cp_at_own_value_equals_plain_prediction() {
        let t = synthetic_table(300, 5);
        let model = fit_forest(
            &t,
            &ForestParams {
                n_trees: 10,
                ..ForestParams::default()
            },
            1,
        )
        .unwrap();
        let col = t.schema.column_index("distance_to_goal").unwrap();
        let obs = &t.rows[7];
        let own = obs[col];
        let grid = FeatureGrid {
            feature: "distance_to_goal".to_string(),
            points: GridPoints::Continuous(vec![own - 1.0, own, own + 1.0]),
        };
        let curve = cp_profile(&model, obs, &grid, "one").unwrap();
        assert_eq!(curve.values[1], model.predict_row(obs));
        assert_eq!(curve.k, 1);
    }

    #[test]
    fn ap_of_two_rows_is_mean_of_cp_curves() {
        let t = synthetic_table(200, 6);
        let model = fit_forest(
            &t,
            &ForestParams {
                n_trees: 8,
                ..ForestParams::default()
            },
            2,
        )
        .unwrap();
        let grid = grid_for_feature(&t, "angle_to_goal", 15).unwrap();
        let a = cp_profile(&model, &t.rows[0], &grid, "a").unwrap();
        let b = cp_profile(&model, &t.rows[1], &grid, "b").unwrap();
        let group = vec![t.rows[0].clone(), t.rows[1].clone()];
        let ap = aggregate_profiles(&model, &group, &grid, "ab").unwrap();
        for i in 0..grid.points.len() {
            assert!((ap.values[i] - (a.values[i] + b.values[i]) / 2.0).abs() < 1e-15);
        }
        assert_eq!(ap.k, 2);
    }

    #[test]
    fn pdp_equals_ap_over_full_table() {
        let t = synthetic_table(150, 7);
        let model = fit_forest(
            &t,
            &ForestParams {
                n_trees: 5,
                ..ForestParams::default()
            },
            3,
        )
        .unwrap();
        let grid = grid_for_feature(&t, "distance_to_goal", 11).unwrap();
        let p = pdp(&model, &t, &grid).unwrap();
        let ap = aggregate_profiles(&model, &t.rows, &grid, "ALL").unwrap();
        assert_eq!(p, ap);
    }

    #[test]
    fn union_linearity() {
        let t = synthetic_table(120, 8);
        let model = fit_forest(
            &t,
            &ForestParams {
                n_trees: 6,
                ..ForestParams::default()
            },
            4,
        )
        .unwrap();
        let grid = grid_for_feature(&t, "minute", 13).unwrap();
        let a: Vec<Vec<f64>> = t.rows[..40].to_vec();
        let b: Vec<Vec<f64>> = t.rows[40..].to_vec();
        let ap_a = aggregate_profiles(&model, &a, &grid, "a").unwrap();
        let ap_b = aggregate_profiles(&model, &b, &grid, "b").unwrap();
        let ap_all = aggregate_profiles(&model, &t.rows, &grid, "all").unwrap();
        for i in 0..grid.points.len() {
            let expect = (40.0 * ap_a.values[i] + 80.0 * ap_b.values[i]) / 120.0;
            assert!((ap_all.values[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn group_permutation_invariance() {
        let t = synthetic_table(60, 9);
        let model = fit_forest(
            &t,
            &ForestParams {
                n_trees: 4,
                ..ForestParams::default()
            },
            5,
        )
        .unwrap();
        let grid = grid_for_feature(&t, "distance_to_goal", 9).unwrap();
        let forward = aggregate_profiles(&model, &t.rows, &grid, "g").unwrap();
        let mut reversed_rows = t.rows.clone();
        reversed_rows.reverse();
        let reversed = aggregate_profiles(&model, &reversed_rows, &grid, "g").unwrap();
        for i in 0..grid.points.len() {
            assert!((forward.values[i] - reversed.values[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn categorical_substitution_rewrites_whole_group() {
        let t = synthetic_table(400, 10);
        let model = fit_forest(
            &t,
            &ForestParams {
                n_trees: 5,
                ..ForestParams::default()
            },
            6,
        )
        .unwrap();
        let grid = grid_for_feature(&t, "situation", 101).unwrap();
        let curve = aggregate_profiles(&model, &t.rows[..10].to_vec(), &grid, "g").unwrap();
        assert_eq!(curve.values.len(), 5);
        for v in curve.values {
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn what_if_interpolation_and_errors() {
        let flat = ProfileCurve {
            feature: "distance_to_goal".to_string(),
            grid: FeatureGrid {
                feature: "distance_to_goal".to_string(),
                points: GridPoints::Continuous(vec![0.0, 10.0]),
            },
            values: vec![0.3, 0.3],
            k: 5,
            group_label: "g".to_string(),
        };
        let w = what_if_ratio(&flat, 2.0, 8.0).unwrap();
        assert_eq!(w.ratio, 1.0);
        assert_eq!(w.percent_change, 0.0);

        let rising = ProfileCurve {
            values: vec![0.2, 0.4],
            ..flat.clone()
        };
        let w = what_if_ratio(&rising, 0.0, 10.0).unwrap();
        assert_eq!(w.ratio, 2.0);
        assert!((what_if_ratio(&rising, 0.0, 5.0).unwrap().ap_to - 0.3).abs() < 1e-15);

        assert!(matches!(
            what_if_ratio(&rising, -1.0, 5.0),
            Err(ProfileError::OutOfGrid { .. })
        ));
        let zero = ProfileCurve {
            values: vec![0.0, 0.4],
            ..flat
        };
        assert!(matches!(what_if_ratio(&zero, 0.0, 10.0), Err(ProfileError::ZeroBaseline)));
    }
}
