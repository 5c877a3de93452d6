//! End-to-end checks on the compiled `xg` binary: deterministic pipeline
//! output on the bundled sample and the documented exit-code contract
//! (0 success, 1 invalid input, 2 runtime failure).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

fn xg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xg"))
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .and_then(Path::parent)
        .expect("workspace root")
        .to_path_buf()
}

/// Every regular file under `dir`, keyed by its path relative to `dir`.
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).expect("read dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                walk(base, &path, out);
            } else {
                let rel = path.strip_prefix(base).expect("relative").to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).expect("read file"));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

fn write_sample_config(dir: &Path, out_dir: &Path) -> PathBuf {
    let csv = repo_root().join("data/sample_shots.csv");
    assert!(csv.exists(), "bundled sample csv missing at {}", csv.display());
    let config = serde_json::json!({
        "data": { "csv": csv },
        "split": { "test_fraction": 0.2, "seed": 42 },
        "balance": {
            "method": "over_smoothed",
            "target_minority_fraction": 0.5,
            "seed": 7,
            "bandwidth_scale": 1.0
        },
        "model": {
            "kind": "forest",
            "seed": 1,
            "n_trees": 100,
            "mtry": null,
            "min_leaf": 1,
            "max_depth": null,
            "vote_mode": "hard_vote",
            "n_rounds": 100,
            "learning_rate": 0.1,
            "subsample": 1.0
        },
        "metrics": { "threshold": 0.5 },
        "profiles": { "features": ["distance_to_goal", "angle_to_goal"], "m": 101 },
        "out_dir": out_dir
    });
    let path = dir.join("run.json");
    std::fs::write(&path, serde_json::to_vec_pretty(&config).expect("serialize")).expect("write config");
    path
}

#[test]
fn gate_09_repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out_dir = dir.path().join("out");
    let config = write_sample_config(dir.path(), &out_dir);

    let started = Instant::now();
    let run = || {
        let output = xg()
            .args(["run", "--config"])
            .arg(&config)
            .output()
            .expect("spawn xg");
        assert!(
            output.status.success(),
            "xg run failed:\n{}",
            String::from_utf8_lossy(&output.stderr)
        );
    };

    run();
    let first = snapshot(&out_dir);
    std::fs::remove_dir_all(&out_dir).expect("clear out dir");
    run();
    let second = snapshot(&out_dir);
    let elapsed = started.elapsed();

    assert!(!first.is_empty(), "first run produced no artifacts");
    for name in ["model.json", "metrics.json", "scores.csv", "manifest.json"] {
        assert!(first.contains_key(name), "missing artifact {name}");
    }
    assert_eq!(
        first.keys().collect::<Vec<_>>(),
        second.keys().collect::<Vec<_>>(),
        "artifact sets differ between runs"
    );
    for (name, bytes) in &first {
        assert_eq!(bytes, &second[name], "artifact {name} differs between runs");
    }
    let outcome = if elapsed <= Duration::from_secs(60) { "PASS" } else { "FAIL" };
    println!("acceptance 09 end-to-end-determinism: {outcome} ({elapsed:?})");
    assert!(
        elapsed <= Duration::from_secs(60),
        "two runs took {elapsed:?}, budget is 60 s"
    );
}

#[test]
fn invalid_input_exits_one() {
    // Missing config file.
    let status = xg()
        .args(["run", "--config", "/definitely/not/here.json"])
        .output()
        .expect("spawn xg");
    assert_eq!(status.status.code(), Some(1));

    // Config referencing a missing data file.
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("bad.json");
    std::fs::write(
        &config,
        serde_json::to_vec(&serde_json::json!({
            "data": { "csv": dir.path().join("absent.csv") },
            "out_dir": dir.path().join("out")
        }))
        .expect("serialize"),
    )
    .expect("write config");
    let output = xg().args(["run", "--config"]).arg(&config).output().expect("spawn xg");
    assert_eq!(output.status.code(), Some(1));
    assert!(
        String::from_utf8_lossy(&output.stderr).contains("not found"),
        "stderr should explain the missing file"
    );

    // Unknown enum value caught at validation time.
    let config2 = dir.path().join("bad2.json");
    let csv = repo_root().join("data/sample_shots.csv");
    std::fs::write(
        &config2,
        serde_json::to_vec(&serde_json::json!({
            "data": { "csv": csv },
            "balance": {
                "method": "smote",
                "target_minority_fraction": 0.5,
                "seed": 7,
                "bandwidth_scale": 1.0
            },
            "out_dir": dir.path().join("out")
        }))
        .expect("serialize"),
    )
    .expect("write config");
    let output = xg().args(["run", "--config"]).arg(&config2).output().expect("spawn xg");
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn locked_out_dir_exits_two() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out_dir = dir.path().join("out");
    let config = write_sample_config(dir.path(), &out_dir);

    std::fs::create_dir_all(&out_dir).expect("create out dir");
    std::fs::write(out_dir.join(".xg.lock"), b"").expect("plant lock");

    let output = xg().args(["run", "--config"]).arg(&config).output().expect("spawn xg");
    assert_eq!(output.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&output.stderr).contains("locked"),
        "stderr should mention the lock"
    );
}
