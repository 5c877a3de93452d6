//! Pipeline orchestration: ingest → derive → encode → split → balance →
//! fit → evaluate → score → reports/profiles, with a manifest recording
//! seeds, the config hash, row counts, metrics, and artifact checksums.
//! Given the same config the emitted artifacts are byte-identical.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};

use serde::Serialize;

use xg_core::balance::{rebalance, BalanceMethod};
use xg_core::data::{
    derive_features, encode_features, parse_shot_csv, split_train_test, summarize_league,
    EnrichedShot, FeatureTable, ShotRecord,
};
use xg_core::metrics::{match_mae, metric_report, MetricReport};
use xg_core::model::{fit_forest, fit_gbt, load_model, save_model, EnsembleModel};
use xg_core::profiles::{aggregate_profiles, grid_for_feature, pdp, what_if_ratio, GridPoints, ProfileCurve, WhatIf};
use xg_core::report::{match_report, player_season_table, render_curves_svg, MatchReport, SvgCurve};

use crate::config::{hex_sha256, ModelSpec, RunConfig};
use crate::CliError;

fn stage<T, E: Display>(name: &str, r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Runtime(format!("stage {name}: {e}")))
}

/// Exclusive hold on an output directory for the duration of a run.
pub struct OutDirLock {
    path: PathBuf,
}

impl OutDirLock {
    pub fn acquire(out_dir: &Path) -> Result<OutDirLock, CliError> {
        std::fs::create_dir_all(out_dir)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
        let path = out_dir.join(".xg.lock");
        match std::fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(OutDirLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Runtime(format!(
                "output directory {} is locked by another run (remove {} if stale)",
                out_dir.display(),
                path.display()
            ))),
            Err(e) => Err(CliError::Runtime(format!("cannot lock {}: {e}", out_dir.display()))),
        }
    }
}

impl Drop for OutDirLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

#[derive(Debug, Serialize)]
pub struct RowCounts {
    pub ingested: usize,
    pub dropped_own_goals: usize,
    pub skipped_rows: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub balanced_rows: usize,
    pub train_minority_fraction: f64,
    pub balanced_minority_fraction: f64,
}

/// Everything the fitting half of the pipeline produces.
pub struct Prepared {
    pub enriched: Vec<EnrichedShot>,
    pub full: FeatureTable,
    pub test: FeatureTable,
    pub model: EnsembleModel,
    pub counts: RowCounts,
}

/// Ingest through fit. Balancing touches only the training partition; the
/// test rows pass through untouched.
pub fn prepare(config: &RunConfig) -> Result<Prepared, CliError> {
    let outcome = stage("ingest", parse_shot_csv(&config.data.csv, config.data.strict))?;
    let enriched = stage("derive", derive_features(&outcome.records))?;
    let full = stage("encode", encode_features(&enriched, None))?;
    let (train, test) = stage(
        "split",
        split_train_test(&full, config.split.test_fraction, config.split.seed),
    )?;

    let balance_cfg = config.balance.to_core()?;
    let balanced = if balance_cfg.method == BalanceMethod::None {
        train.clone()
    } else {
        stage("balance", rebalance(&train, &balance_cfg))?
    };

    let mut model = match config.model.to_spec()? {
        ModelSpec::Forest(params) => stage("fit", fit_forest(&balanced, &params, config.model.seed))?,
        ModelSpec::Gbt(params) => stage("fit", fit_gbt(&balanced, &params, config.model.seed))?,
    };
    model.train_meta.balance_method = balance_cfg.method.as_str().to_string();

    let counts = RowCounts {
        ingested: outcome.records.len(),
        dropped_own_goals: outcome.dropped_own_goals,
        skipped_rows: outcome.skipped.len(),
        train_rows: train.n_rows(),
        test_rows: test.n_rows(),
        balanced_rows: balanced.n_rows(),
        train_minority_fraction: train.minority_fraction(),
        balanced_minority_fraction: balanced.minority_fraction(),
    };
    Ok(Prepared {
        enriched,
        full,
        test,
        model,
        counts,
    })
}

/// Reuse a previously saved model when it matches the current feature
/// schema; otherwise fit afresh from the config.
pub fn obtain_model(config: &RunConfig) -> Result<Prepared, CliError> {
    let mut prepared = prepare(config)?;
    let model_path = config.out_dir.join("model.json");
    if model_path.exists() {
        if let Ok(saved) = load_model(&model_path) {
            if saved.check_schema(&prepared.full.schema).is_ok() {
                prepared.model = saved;
            }
        }
    }
    Ok(prepared)
}

pub fn evaluate_on_test(prepared: &Prepared, threshold: f64) -> Result<MetricReport, CliError> {
    let probs = stage("evaluate", prepared.model.predict_proba(&prepared.test))?;
    let by_key: BTreeMap<&str, &EnrichedShot> = prepared
        .enriched
        .iter()
        .map(|s| (s.record.shot_id.as_str(), s))
        .collect();
    let mae = stage(
        "evaluate",
        match_mae(prepared.test.row_keys.iter().enumerate().map(|(i, key)| {
            let shot = by_key[key.as_str()];
            (
                shot.record.match_id.as_str(),
                shot.record.team.as_str(),
                probs[i],
                prepared.test.labels[i],
            )
        })),
    )?;
    stage("evaluate", metric_report(&probs, &prepared.test.labels, threshold, Some(mae)))
}

/// Per-shot probabilities over the full dataset, in input order.
pub fn score_all(prepared: &Prepared) -> Result<Vec<f64>, CliError> {
    stage("score", prepared.model.predict_proba(&prepared.full))
}

/// A filter like `team=X,match=Y` or `player=P,season=S`.
#[derive(Debug, Default, Clone)]
pub struct GroupSpec {
    pub team: Option<String>,
    pub match_id: Option<String>,
    pub player: Option<String>,
    pub season: Option<String>,
}

impl GroupSpec {
    pub fn parse(spec: &str) -> Result<GroupSpec, CliError> {
        let mut g = GroupSpec::default();
        for part in spec.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("bad group clause {part:?}, expected key=value")))?;
            let value = value.trim().to_string();
            match key.trim() {
                "team" => g.team = Some(value),
                "match" => g.match_id = Some(value),
                "player" => g.player = Some(value),
                "season" => g.season = Some(value),
                other => {
                    return Err(CliError::Validation(format!(
                        "unknown group key {other:?} (expected team/match/player/season)"
                    )));
                }
            }
        }
        Ok(g)
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        for (k, v) in [
            ("team", &self.team),
            ("match", &self.match_id),
            ("player", &self.player),
            ("season", &self.season),
        ] {
            if let Some(v) = v {
                parts.push(format!("{k}={v}"));
            }
        }
        if parts.is_empty() {
            "ALL".to_string()
        } else {
            parts.join(",")
        }
    }

    pub fn matches(&self, rec: &ShotRecord) -> bool {
        fn ok(filter: &Option<String>, value: &str) -> bool {
            filter.as_deref().map_or(true, |f| f == value)
        }
        ok(&self.team, &rec.team)
            && ok(&self.match_id, &rec.match_id)
            && ok(&self.player, &rec.player)
            && ok(&self.season, &rec.season)
    }
}

/// Profile one feature for a shot group (or the whole table when the group
/// is empty), on the model's training schema.
pub fn profile_group(
    prepared: &Prepared,
    feature: &str,
    m: usize,
    group: &GroupSpec,
) -> Result<ProfileCurve, CliError> {
    let grid = stage("profile", grid_for_feature(&prepared.full, feature, m))?;
    let label = group.label();
    if label == "ALL" {
        return stage("profile", pdp(&prepared.model, &prepared.full, &grid));
    }
    let rows: Vec<Vec<f64>> = prepared
        .full
        .rows
        .iter()
        .zip(&prepared.enriched)
        .filter(|(_, shot)| group.matches(&shot.record))
        .map(|(row, _)| row.clone())
        .collect();
    if rows.is_empty() {
        return Err(CliError::Validation(format!("group {label:?} matches no shots")));
    }
    stage("profile", aggregate_profiles(&prepared.model, &rows, &grid, &label))
}

pub fn what_if(
    prepared: &Prepared,
    feature: &str,
    m: usize,
    group: &GroupSpec,
    from: f64,
    to: f64,
) -> Result<WhatIf, CliError> {
    let curve = profile_group(prepared, feature, m, group)?;
    stage("whatif", what_if_ratio(&curve, from, to))
}

/// CSV with one row per grid point; works for both grid kinds.
pub fn profile_csv(curve: &ProfileCurve) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([curve.feature.as_str(), "mean_prediction", "group", "k"]).unwrap();
    match &curve.grid.points {
        GridPoints::Continuous(points) => {
            for (x, v) in points.iter().zip(&curve.values) {
                w.write_record([format!("{x}"), format!("{v}"), curve.group_label.clone(), curve.k.to_string()])
                    .unwrap();
            }
        }
        GridPoints::Categorical(levels) => {
            for (level, v) in levels.iter().zip(&curve.values) {
                w.write_record([level.clone(), format!("{v}"), curve.group_label.clone(), curve.k.to_string()])
                    .unwrap();
            }
        }
    }
    w.into_inner().unwrap()
}

pub fn profile_svg(curves: &[&ProfileCurve], title: &str) -> Result<String, CliError> {
    const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let svg_curves: Vec<SvgCurve> = curves
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let xs = match &c.grid.points {
                GridPoints::Continuous(p) => p.clone(),
                GridPoints::Categorical(levels) => (0..levels.len()).map(|j| j as f64).collect(),
            };
            SvgCurve {
                label: c.group_label.clone(),
                xs,
                ys: c.values.clone(),
                color: COLORS[i % COLORS.len()].to_string(),
            }
        })
        .collect();
    let feature = curves.first().map(|c| c.feature.as_str()).unwrap_or("feature");
    stage("profile", render_curves_svg(title, feature, "mean predicted xG", &svg_curves))
}

pub fn scores_csv(enriched: &[EnrichedShot], probs: &[f64]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "shot_id", "match_id", "player", "team", "season", "date", "distance_to_goal", "angle_to_goal",
        "status", "xg",
    ])
    .unwrap();
    for (shot, &p) in enriched.iter().zip(probs) {
        let r = &shot.record;
        w.write_record([
            r.shot_id.as_str(),
            r.match_id.as_str(),
            r.player.as_str(),
            r.team.as_str(),
            r.season.as_str(),
            r.date.as_str(),
            &format!("{}", shot.features.distance_to_goal),
            &format!("{}", shot.features.angle_to_goal),
            &r.status.to_string(),
            &format!("{p}"),
        ])
        .unwrap();
    }
    w.into_inner().unwrap()
}

/// All per-match reports, grouped by match id in sorted order.
pub fn all_match_reports(enriched: &[EnrichedShot], probs: &[f64]) -> Result<Vec<MatchReport>, CliError> {
    let mut by_match: BTreeMap<&str, (Vec<EnrichedShot>, Vec<f64>)> = BTreeMap::new();
    for (shot, &p) in enriched.iter().zip(probs) {
        let e = by_match.entry(&shot.record.match_id).or_default();
        e.0.push(shot.clone());
        e.1.push(p);
    }
    by_match
        .values()
        .map(|(shots, probs)| stage("report", match_report(shots, probs)))
        .collect()
}

fn match_reports_csv(reports: &[MatchReport]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "match_id", "date", "team", "shots", "goals", "xg", "mean_angle", "mean_distance",
        "offensive_efficiency",
    ])
    .unwrap();
    for r in reports {
        for t in &r.teams {
            w.write_record([
                r.match_id.as_str(),
                r.date.as_str(),
                t.team.as_str(),
                &t.shots.to_string(),
                &t.goals.to_string(),
                &format!("{}", t.xg),
                &format!("{}", t.mean_angle),
                &format!("{}", t.mean_distance),
                &format!("{}", t.offensive_efficiency),
            ])
            .unwrap();
        }
    }
    w.into_inner().unwrap()
}

fn match_reports_text(reports: &[MatchReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:<12} {:<24} {:>6} {:>6} {:>8} {:>8} {:>8} {:>8}\n",
        "match", "date", "team", "shots", "goals", "xG", "angle", "dist", "eff"
    ));
    for r in reports {
        for t in &r.teams {
            out.push_str(&format!(
                "{:<12} {:<12} {:<24} {:>6} {:>6} {:>8.3} {:>8.2} {:>8.2} {:>8.3}\n",
                r.match_id, r.date, t.team, t.shots, t.goals, t.xg, t.mean_angle, t.mean_distance,
                t.offensive_efficiency
            ));
        }
    }
    out
}

fn player_table_csv(enriched: &[EnrichedShot], probs: &[f64]) -> Result<Vec<u8>, CliError> {
    let table = stage("report", player_season_table(enriched, probs))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "player", "team", "season", "games", "shots", "goals", "xg", "mean_angle", "mean_distance",
        "conversion_percent", "offensive_efficiency",
    ])
    .unwrap();
    for p in &table {
        w.write_record([
            p.player.as_str(),
            p.team.as_str(),
            p.season.as_str(),
            &p.games.to_string(),
            &p.shots.to_string(),
            &p.goals.to_string(),
            &format!("{}", p.xg),
            &format!("{}", p.mean_angle),
            &format!("{}", p.mean_distance),
            &format!("{}", p.conversion_percent),
            &format!("{}", p.offensive_efficiency),
        ])
        .unwrap();
    }
    Ok(w.into_inner().unwrap())
}

pub fn league_summary_csv(records: &[ShotRecord]) -> Vec<u8> {
    let rows = summarize_league(records);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "league", "matches", "shots", "mean_shots_per_match", "goals", "mean_goals_per_match",
        "conversion_percent",
    ])
    .unwrap();
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for r in &rows {
        w.write_record([
            r.label.clone(),
            r.match_count.to_string(),
            r.shot_count.to_string(),
            opt(r.mean_shots_per_match),
            r.goal_count.to_string(),
            opt(r.mean_goals_per_match),
            opt(r.conversion_percent),
        ])
        .unwrap();
    }
    w.into_inner().unwrap()
}

#[derive(Serialize)]
struct Manifest<'a> {
    config_hash: &'a str,
    seeds: BTreeMap<&'static str, u64>,
    stages: Vec<&'static str>,
    counts: &'a RowCounts,
    metrics: &'a MetricReport,
    artifacts: BTreeMap<String, String>,
}

struct ArtifactSink<'a> {
    out_dir: &'a Path,
    checksums: BTreeMap<String, String>,
}

impl ArtifactSink<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        std::fs::write(self.out_dir.join(name), bytes)
            .map_err(|e| CliError::Runtime(format!("writing {name}: {e}")))?;
        self.checksums.insert(name.to_string(), hex_sha256(bytes));
        Ok(())
    }
}

/// The full end-to-end run. Returns the manifest path.
pub fn run_pipeline(config: &RunConfig, config_hash: &str) -> Result<PathBuf, CliError> {
    let _lock = OutDirLock::acquire(&config.out_dir)?;
    let mut sink = ArtifactSink {
        out_dir: &config.out_dir,
        checksums: BTreeMap::new(),
    };

    let prepared = prepare(config)?;
    let metrics = evaluate_on_test(&prepared, config.metrics.threshold)?;
    let probs = score_all(&prepared)?;

    // model + features
    let model_path = config.out_dir.join("model.json");
    stage("persist", save_model(&prepared.model, &model_path))?;
    let model_bytes = std::fs::read(&model_path).map_err(|e| CliError::Runtime(e.to_string()))?;
    sink.checksums.insert("model.json".to_string(), hex_sha256(&model_bytes));
    stage("export", prepared.full.export_csv(&config.out_dir.join("features.csv")))?;
    for name in ["features.csv", "features.schema.json"] {
        let bytes = std::fs::read(config.out_dir.join(name)).map_err(|e| CliError::Runtime(e.to_string()))?;
        sink.checksums.insert(name.to_string(), hex_sha256(&bytes));
    }

    // tables
    let records: Vec<ShotRecord> = prepared.enriched.iter().map(|s| s.record.clone()).collect();
    sink.write("metrics.json", serde_json::to_string_pretty(&metrics).unwrap().as_bytes())?;
    sink.write("scores.csv", &scores_csv(&prepared.enriched, &probs))?;
    let reports = all_match_reports(&prepared.enriched, &probs)?;
    sink.write("match_reports.csv", &match_reports_csv(&reports))?;
    sink.write("match_reports.txt", match_reports_text(&reports).as_bytes())?;
    sink.write("player_season.csv", &player_table_csv(&prepared.enriched, &probs)?)?;
    sink.write("league_summary.csv", &league_summary_csv(&records))?;

    // profiles
    for feature in &config.profiles.features {
        let curve = profile_group(&prepared, feature, config.profiles.m, &GroupSpec::default())?;
        sink.write(&format!("profile_{feature}.csv"), &profile_csv(&curve))?;
        let svg = profile_svg(&[&curve], &format!("Partial dependence: {feature}"))?;
        sink.write(&format!("profile_{feature}.svg"), svg.as_bytes())?;
    }

    let manifest = Manifest {
        config_hash,
        seeds: BTreeMap::from([
            ("split", config.split.seed),
            ("balance", config.balance.seed),
            ("model", config.model.seed),
        ]),
        stages: vec![
            "ingest", "derive", "encode", "split", "balance", "fit", "evaluate", "score", "report",
            "profile", "persist",
        ],
        counts: &prepared.counts,
        metrics: &metrics,
        artifacts: sink.checksums.clone(),
    };
    let manifest_path = config.out_dir.join("manifest.json");
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).unwrap())
        .map_err(|e| CliError::Runtime(format!("writing manifest: {e}")))?;
    Ok(manifest_path)
}
