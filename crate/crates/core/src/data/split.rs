use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::encode::{FeatureTable, Partition};
use super::DataError;

/// Stratified train/test split. Per-class test proportions land within one
/// row of `test_fraction`, and a fixed seed gives an identical partition.
pub fn split_train_test(
    table: &FeatureTable,
    test_fraction: f64,
    seed: u64,
) -> Result<(FeatureTable, FeatureTable), DataError> {
    let (neg, pos) = table.class_counts();
    if neg < 2 || pos < 2 {
        return Err(DataError::DegenerateClass);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for class in [0u8, 1u8] {
        let mut idx: Vec<usize> = (0..table.n_rows()).filter(|&i| table.labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let n_test = (idx.len() as f64 * test_fraction).round() as usize;
        test_idx.extend_from_slice(&idx[..n_test]);
        train_idx.extend_from_slice(&idx[n_test..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    Ok((
        table.select(&train_idx, Partition::Train),
        table.select(&test_idx, Partition::Test),
    ))
}
