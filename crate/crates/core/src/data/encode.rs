//! Encoding enriched shots into the numeric, model-facing feature table.
//!
//! Continuous columns: minute, distance_to_goal, angle_to_goal. Everything
//! categorical (home/away, situation, shot type, last action) is one-hot
//! encoded against a schema learned from the training data. At prediction
//! time, levels unseen in training encode as an all-zero group.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::shot::EnrichedShot;
use super::DataError;

pub const CONTINUOUS_SOURCES: [&str; 3] = ["minute", "distance_to_goal", "angle_to_goal"];
pub const CATEGORICAL_SOURCES: [&str; 4] = ["home_away", "situation", "shot_type", "last_action"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Onehot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMeta {
    /// Continuous columns use the source name; one-hot columns use "source=Level".
    pub name: String,
    pub kind: ColumnKind,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub columns: Vec<ColumnMeta>,
}

fn categorical_value(shot: &EnrichedShot, source: &str) -> String {
    match source {
        "home_away" => shot.record.home_away.as_str().to_string(),
        "situation" => shot.record.situation.as_str().to_string(),
        "shot_type" => shot.record.shot_type.as_str().to_string(),
        "last_action" => shot.record.last_action.clone(),
        other => unreachable!("unknown categorical source {other}"),
    }
}

fn continuous_value(shot: &EnrichedShot, source: &str) -> f64 {
    match source {
        "minute" => f64::from(shot.record.minute),
        "distance_to_goal" => shot.features.distance_to_goal,
        "angle_to_goal" => shot.features.angle_to_goal,
        other => unreachable!("unknown continuous source {other}"),
    }
}

impl FeatureSchema {
    /// Learn the encoding layout from training data. One-hot levels are the
    /// distinct values observed, in sorted order for determinism.
    pub fn from_shots(shots: &[EnrichedShot]) -> FeatureSchema {
        let mut columns = Vec::new();
        for source in CONTINUOUS_SOURCES {
            columns.push(ColumnMeta {
                name: source.to_string(),
                kind: ColumnKind::Continuous,
                source: source.to_string(),
            });
        }
        for source in CATEGORICAL_SOURCES {
            let levels: BTreeSet<String> = shots.iter().map(|s| categorical_value(s, source)).collect();
            for level in levels {
                columns.push(ColumnMeta {
                    name: format!("{source}={level}"),
                    kind: ColumnKind::Onehot,
                    source: source.to_string(),
                });
            }
        }
        FeatureSchema { columns }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Column indices belonging to a source (one element for continuous).
    pub fn group_indices(&self, source: &str) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.source == source)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn continuous_indices(&self) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == ColumnKind::Continuous)
            .map(|(i, _)| i)
            .collect()
    }

    fn validate(&self) -> Result<(), DataError> {
        for source in CONTINUOUS_SOURCES {
            if self.column_index(source).is_none() {
                return Err(DataError::SchemaMismatch(format!(
                    "schema lacks continuous column {source}"
                )));
            }
        }
        Ok(())
    }

    pub fn encode_row(&self, shot: &EnrichedShot) -> Vec<f64> {
        self.columns
            .iter()
            .map(|col| match col.kind {
                ColumnKind::Continuous => continuous_value(shot, &col.source),
                ColumnKind::Onehot => {
                    let level = &col.name[col.source.len() + 1..];
                    f64::from(categorical_value(shot, &col.source) == level)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    Full,
    Train,
    Test,
}

/// The model-facing dataset: an n x d numeric matrix with labels, row keys
/// (shot ids), and provenance tags. Synthetic rows come from over-sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub schema: FeatureSchema,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub row_keys: Vec<String>,
    pub partition: Partition,
    pub synthetic: Vec<bool>,
}

impl FeatureTable {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.schema.len()
    }

    /// (negatives, positives)
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - pos, pos)
    }

    pub fn minority_fraction(&self) -> f64 {
        let (neg, pos) = self.class_counts();
        let n = neg + pos;
        if n == 0 {
            return 0.0;
        }
        pos.min(neg) as f64 / n as f64
    }

    pub fn select(&self, indices: &[usize], partition: Partition) -> FeatureTable {
        FeatureTable {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            row_keys: indices.iter().map(|&i| self.row_keys[i].clone()).collect(),
            partition,
            synthetic: indices.iter().map(|&i| self.synthetic[i]).collect(),
        }
    }

    /// Observed [min, max] of a column.
    pub fn column_range(&self, col: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in &self.rows {
            lo = lo.min(row[col]);
            hi = hi.max(row[col]);
        }
        (lo, hi)
    }

    /// Write the matrix as CSV plus a JSON sidecar with the column metadata.
    pub fn export_csv(&self, csv_path: &Path) -> Result<(), DataError> {
        let mut writer = csv::Writer::from_path(csv_path)?;
        let mut header = vec!["row_key".to_string()];
        header.extend(self.schema.columns.iter().map(|c| c.name.clone()));
        header.push("label".to_string());
        writer.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut rec = vec![self.row_keys[i].clone()];
            rec.extend(self.rows[i].iter().map(|v| format!("{v}")));
            rec.push(self.labels[i].to_string());
            writer.write_record(&rec)?;
        }
        writer.flush()?;

        let sidecar = csv_path.with_extension("schema.json");
        let meta = serde_json::json!({
            "columns": self.schema.columns,
            "n_rows": self.n_rows(),
            "partition": self.partition,
        });
        std::fs::write(sidecar, serde_json::to_string_pretty(&meta).expect("schema serializes"))?;
        Ok(())
    }
}

/// Encode enriched shots against `schema`, or learn the schema from the data
/// when none is given (training path).
pub fn encode_features(
    shots: &[EnrichedShot],
    schema: Option<&FeatureSchema>,
) -> Result<FeatureTable, DataError> {
    let schema = match schema {
        Some(s) => {
            s.validate()?;
            s.clone()
        }
        None => FeatureSchema::from_shots(shots),
    };
    let rows: Vec<Vec<f64>> = shots.iter().map(|s| schema.encode_row(s)).collect();
    Ok(FeatureTable {
        schema,
        rows,
        labels: shots.iter().map(|s| s.record.status).collect(),
        row_keys: shots.iter().map(|s| s.record.shot_id.clone()).collect(),
        partition: Partition::Full,
        synthetic: vec![false; shots.len()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{derive_features, ShotRecord, Situation};

    fn shots_with_situations(situations: &[Situation]) -> Vec<EnrichedShot> {
        let recs: Vec<ShotRecord> = situations
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut r = ShotRecord::sample();
                r.shot_id = format!("s{i}");
                r.situation = s;
                r
            })
            .collect();
        derive_features(&recs).unwrap()
    }

    #[test]
    fn situation_group_covers_observed_levels_one_hot() {
        let shots = shots_with_situations(&[Situation::OpenPlay, Situation::Penalty]);
        let table = encode_features(&shots, None).unwrap();
        let group = table.schema.group_indices("situation");
        assert_eq!(group.len(), 2);
        for row in &table.rows {
            let active: f64 = group.iter().map(|&i| row[i]).sum();
            assert_eq!(active, 1.0);
        }
    }

    #[test]
    fn unseen_level_encodes_as_zero_group() {
        let train = shots_with_situations(&[Situation::OpenPlay, Situation::OpenPlay]);
        let table = encode_features(&train, None).unwrap();
        let mut pred = shots_with_situations(&[Situation::Penalty]);
        pred[0].record.last_action = "NeverSeenAction".into();
        let encoded = encode_features(&pred, Some(&table.schema)).unwrap();
        for source in ["situation", "last_action"] {
            let group = table.schema.group_indices(source);
            let active: f64 = group.iter().map(|&i| encoded.rows[0][i]).sum();
            assert_eq!(active, 0.0, "group {source} should be all zeros");
        }
    }

    #[test]
    fn every_training_row_has_one_active_level_per_group() {
        let shots = shots_with_situations(&[
            Situation::OpenPlay,
            Situation::Penalty,
            Situation::FromCorner,
            Situation::SetPlay,
        ]);
        let table = encode_features(&shots, None).unwrap();
        for source in CATEGORICAL_SOURCES {
            let group = table.schema.group_indices(source);
            for row in &table.rows {
                let active: f64 = group.iter().map(|&i| row[i]).sum();
                assert_eq!(active, 1.0);
            }
        }
    }

    #[test]
    fn column_names_round_trip_through_export() {
        let shots = shots_with_situations(&[Situation::OpenPlay, Situation::Penalty]);
        let table = encode_features(&shots, None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        table.export_csv(&path).unwrap();

        let mut reader = csv::Reader::from_path(&path).unwrap();
        let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
        let names: Vec<String> = table.schema.columns.iter().map(|c| c.name.clone()).collect();
        assert_eq!(&header[1..header.len() - 1], names.as_slice());

        let sidecar: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("features.schema.json")).unwrap())
                .unwrap();
        assert_eq!(sidecar["n_rows"], 2);
    }

    #[test]
    fn schema_missing_continuous_column_is_rejected() {
        let shots = shots_with_situations(&[Situation::OpenPlay]);
        let mut schema = FeatureSchema::from_shots(&shots);
        schema.columns.retain(|c| c.name != "distance_to_goal");
        assert!(matches!(
            encode_features(&shots, Some(&schema)),
            Err(DataError::SchemaMismatch(_))
        ));
    }
}
