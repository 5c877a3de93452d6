//! Regenerates the bundled sample dataset (data/sample_shots.csv).
//!
//! Usage: cargo run -p xg-core --example gen_sample [-- <path>]

use xg_core::data::write_shot_csv;
use xg_core::synthetic::{generate_shots, SyntheticConfig};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "data/sample_shots.csv".to_string());
    let shots = generate_shots(&SyntheticConfig {
        n: 5000,
        seed: 2024,
        ..SyntheticConfig::default()
    });
    let records: Vec<_> = shots.iter().map(|s| s.record.clone()).collect();
    if std::path::Path::new(&path).exists() {
        std::fs::remove_file(&path).expect("remove old sample");
    }
    if let Some(dir) = std::path::Path::new(&path).parent() {
        std::fs::create_dir_all(dir).expect("create data dir");
    }
    write_shot_csv(std::path::Path::new(&path), &records).expect("write sample csv");
    let goals = records.iter().filter(|r| r.status == 1).count();
    println!("wrote {} shots ({goals} goals) to {path}", records.len());
}
