//! Shot-event data: domain types, pitch geometry, CSV ingestion, feature
//! encoding, train/test splitting, and league summaries.

mod encode;
mod geometry;
mod parse;
mod shot;
mod split;
mod summary;

pub use encode::{
    encode_features, ColumnKind, ColumnMeta, FeatureSchema, FeatureTable, Partition,
    CATEGORICAL_SOURCES, CONTINUOUS_SOURCES,
};
pub use geometry::{compute_angle, compute_distance, GOAL_CENTER_W, GOAL_MOUTH_WIDTH, PITCH_LENGTH, PITCH_WIDTH};
pub use parse::{parse_shot_csv, write_shot_csv, ParseOutcome, SHOT_CSV_HEADER};
pub use shot::{DerivedFeatures, EnrichedShot, HomeAway, League, ShotRecord, ShotResult, ShotType, Situation};
pub use split::split_train_test;
pub use summary::{summarize_league, LeagueSummary};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing column: {0}")]
    MissingColumn(String),
    #[error("bad value at row {row}, column {column}: {reason}")]
    BadValue {
        row: usize,
        column: String,
        reason: String,
    },
    #[error("file contains no data rows")]
    EmptyFile,
    #[error("coordinate out of range: {0}")]
    OutOfRange(String),
    #[error("degenerate shot geometry for shot {shot_id}: on the goal line inside the mouth")]
    Degenerate { shot_id: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("a class has fewer than 2 rows; cannot split")]
    DegenerateClass,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl DataError {
    pub fn bad_value(row: usize, column: &str, reason: impl Into<String>) -> Self {
        DataError::BadValue {
            row,
            column: column.to_string(),
            reason: reason.into(),
        }
    }
}

/// Derive distance/angle features for a batch of validated records,
/// preserving input order. Geometry errors carry the offending shot id.
pub fn derive_features(records: &[ShotRecord]) -> Result<Vec<EnrichedShot>, DataError> {
    records
        .iter()
        .map(|rec| {
            let distance = compute_distance(rec.coord_l, rec.coord_w)
                .map_err(|_| DataError::OutOfRange(format!("shot {}", rec.shot_id)))?;
            let angle = compute_angle(rec.coord_l, rec.coord_w).map_err(|e| match e {
                geometry::GeometryError::Degenerate => DataError::Degenerate {
                    shot_id: rec.shot_id.clone(),
                },
                geometry::GeometryError::OutOfRange => {
                    DataError::OutOfRange(format!("shot {}", rec.shot_id))
                }
            })?;
            Ok(EnrichedShot {
                record: rec.clone(),
                features: DerivedFeatures {
                    distance_to_goal: distance,
                    angle_to_goal: angle,
                },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_features_preserves_order_and_values() {
        let mut recs = Vec::new();
        for i in 0..5 {
            let mut r = ShotRecord::sample();
            r.shot_id = format!("s{i}");
            r.coord_l = 0.8 + 0.02 * i as f64;
            recs.push(r);
        }
        let out = derive_features(&recs).unwrap();
        assert_eq!(out.len(), 5);
        for (i, e) in out.iter().enumerate() {
            assert_eq!(e.record.shot_id, format!("s{i}"));
            let d = compute_distance(e.record.coord_l, e.record.coord_w).unwrap();
            assert_eq!(e.features.distance_to_goal, d);
        }
    }

    #[test]
    fn derive_features_penalty_spot() {
        let mut r = ShotRecord::sample();
        r.situation = Situation::Penalty;
        // x = 11 m, y = 0
        r.coord_l = 1.0 - 11.0 / 105.0;
        r.coord_w = 32.5 / 68.0;
        let out = derive_features(&[r]).unwrap();
        assert!((out[0].features.distance_to_goal - 11.0).abs() < 1e-9);
        assert!((out[0].features.angle_to_goal - 36.80738179878588).abs() < 1e-9);
    }

    #[test]
    fn derive_features_reports_degenerate_goal_mouth_shot() {
        let mut r = ShotRecord::sample();
        r.shot_id = "mouth".into();
        r.coord_l = 1.0;
        r.coord_w = 0.5;
        match derive_features(&[r]) {
            Err(DataError::Degenerate { shot_id }) => assert_eq!(shot_id, "mouth"),
            other => panic!("expected Degenerate, got {other:?}"),
        }
    }
}
