//! Versioned JSON model persistence. Numbers go through serde_json's
//! shortest round-trip float formatting, so a reloaded model predicts
//! bit-identically.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EnsembleModel, ModelError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    #[serde(flatten)]
    model: EnsembleModel,
}

pub fn save_model(model: &EnsembleModel, path: &Path) -> Result<(), ModelError> {
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        model: model.clone(),
    };
    let json = serde_json::to_string(&file).expect("model serializes");
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<EnsembleModel, ModelError> {
    let bytes = std::fs::read(path)?;
    // Version check first so a format bump reports as such, not as corruption.
    let probe: serde_json::Value = serde_json::from_slice(&bytes)
        .map_err(|e| ModelError::CorruptModel(e.to_string()))?;
    let found = probe
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| ModelError::CorruptModel("missing format_version".to_string()))? as u32;
    if found != FORMAT_VERSION {
        return Err(ModelError::SchemaVersionMismatch {
            found,
            expected: FORMAT_VERSION,
        });
    }
    let file: ModelFile =
        serde_json::from_slice(&bytes).map_err(|e| ModelError::CorruptModel(e.to_string()))?;
    Ok(file.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testutil::synthetic_table;
    use crate::model::{fit_forest, ForestParams};

    #[test]
    fn round_trip_predictions_are_bit_identical() {
        let t = synthetic_table(1000, 1);
        let params = ForestParams {
            n_trees: 15,
            ..ForestParams::default()
        };
        let model = fit_forest(&t, &params, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(model, loaded);
        let a = model.predict_proba(&t).unwrap();
        let b = loaded.predict_proba(&t).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let t = synthetic_table(100, 2);
        let model = fit_forest(
            &t,
            &ForestParams {
                n_trees: 2,
                ..ForestParams::default()
            },
            1,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(load_model(&path), Err(ModelError::CorruptModel(_))));
    }

    #[test]
    fn version_mismatch_is_reported() {
        let t = synthetic_table(100, 3);
        let model = fit_forest(
            &t,
            &ForestParams {
                n_trees: 2,
                ..ForestParams::default()
            },
            1,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let text = std::fs::read_to_string(&path)
            .unwrap()
            .replace("\"format_version\":1", "\"format_version\":99");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            load_model(&path),
            Err(ModelError::SchemaVersionMismatch { found: 99, expected: 1 })
        ));
    }
}
