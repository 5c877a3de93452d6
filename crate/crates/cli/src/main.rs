//! `xg` — expected-goals pipeline CLI.
//!
//! Exit codes: 0 success, 1 validation error (bad config/arguments),
//! 2 runtime error (a pipeline stage failed).

mod config;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use xg_core::data::{parse_shot_csv, write_shot_csv, League};
use xg_core::model::save_model;
use xg_core::understat::UnderstatClient;

use config::{load_config, RunConfig};
use pipeline::GroupSpec;

/// Failure modes mapped to exit codes: validation problems exit 1,
/// runtime (stage) failures exit 2.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Parser)]
#[command(name = "xg", about = "Expected-goals modeling, evaluation, and reporting", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Run-configuration JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Override every seed in the config (split, balance, model).
    #[arg(long)]
    seed: Option<u64>,
    /// Override the balancing method: none|under|over_duplicate|over_smoothed.
    #[arg(long)]
    balance: Option<String>,
    /// Override the model kind: forest|gbt.
    #[arg(long)]
    model: Option<String>,
    /// Override the classification threshold.
    #[arg(long)]
    threshold: Option<f64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Download match pages, normalize the shots, and append them to a CSV.
    Fetch {
        /// Provider match ids.
        #[arg(long = "match-id", required = true)]
        match_ids: Vec<String>,
        /// Cache directory for raw pages (falls back to $XG_CACHE_DIR, then ./cache).
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Maximum requests per second.
        #[arg(long, default_value_t = 0.5)]
        rate: f64,
        /// League tag recorded on the fetched shots.
        #[arg(long, default_value = "Other")]
        league: String,
        /// Provider base URL.
        #[arg(long, default_value = "https://understat.com")]
        base_url: String,
        /// Shot CSV to append to.
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate and summarize a shot CSV; write the cleaned rows and a league summary.
    Ingest {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Abort on the first malformed row instead of skipping it.
        #[arg(long)]
        strict: bool,
    },
    /// Fit the configured model and save it to <out_dir>/model.json.
    Train(ConfigArgs),
    /// Report test-set metrics for the configured model.
    Evaluate(ConfigArgs),
    /// Score every shot and write <out_dir>/scores.csv.
    Score(ConfigArgs),
    /// Match or player-season report for a group of shots.
    Report {
        #[command(flatten)]
        common: ConfigArgs,
        /// Group filter, e.g. "team=X,match=Y" or "player=P,season=S".
        #[arg(long)]
        group: String,
    },
    /// Profile a feature (mean model response over a grid) as CSV + SVG.
    Profile {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long)]
        feature: String,
        /// Optional group filter; whole dataset when omitted.
        #[arg(long)]
        group: Option<String>,
    },
    /// Reprice a shot group by moving one feature from one value to another.
    Whatif {
        #[command(flatten)]
        common: ConfigArgs,
        #[arg(long)]
        feature: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        group: Option<String>,
    },
    /// Run the full pipeline and write all artifacts plus a manifest.
    Run(ConfigArgs),
}

/// Load the config and apply command-line overrides. The manifest hash
/// covers the effective config, overrides included.
fn effective_config(args: &ConfigArgs) -> Result<(RunConfig, String), CliError> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.split.seed = seed;
        config.balance.seed = seed;
        config.model.seed = seed;
    }
    if let Some(balance) = &args.balance {
        config.balance.method = balance.clone();
        config.balance.to_core()?;
    }
    if let Some(model) = &args.model {
        config.model.kind = model.clone();
        config.model.to_spec()?;
    }
    if let Some(threshold) = args.threshold {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(CliError::Validation(format!("threshold must be in [0, 1], got {threshold}")));
        }
        config.metrics.threshold = threshold;
    }
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    let hash = config::hex_sha256(&serde_json::to_vec(&config).expect("config serializes"));
    Ok((config, hash))
}

fn parse_league(s: &str) -> Result<League, CliError> {
    League::parse(s).ok_or_else(|| CliError::Validation(format!("unknown league {s:?}")))
}

fn cmd_fetch(
    match_ids: &[String],
    cache: Option<PathBuf>,
    rate: f64,
    league: &str,
    base_url: &str,
    out: &PathBuf,
) -> Result<(), CliError> {
    if rate <= 0.0 {
        return Err(CliError::Validation(format!("rate must be positive, got {rate}")));
    }
    let league = parse_league(league)?;
    let cache = cache
        .or_else(|| std::env::var_os("XG_CACHE_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("cache"));
    let client = UnderstatClient::new(base_url, &cache, rate, league);
    let mut total = 0usize;
    for match_id in match_ids {
        let records = client
            .fetch_match(match_id)
            .map_err(|e| CliError::Runtime(format!("match {match_id}: {e}")))?;
        total += records.len();
        write_shot_csv(out, &records).map_err(|e| CliError::Runtime(e.to_string()))?;
        println!("match {match_id}: {} shots", records.len());
    }
    println!("appended {total} shots to {}", out.display());
    Ok(())
}

fn cmd_ingest(csv: &PathBuf, out: &PathBuf, strict: bool) -> Result<(), CliError> {
    if !csv.exists() {
        return Err(CliError::Validation(format!("csv not found: {}", csv.display())));
    }
    let outcome = parse_shot_csv(csv, strict).map_err(|e| CliError::Runtime(format!("stage ingest: {e}")))?;
    std::fs::create_dir_all(out).map_err(|e| CliError::Runtime(e.to_string()))?;
    let clean = out.join("shots_clean.csv");
    if clean.exists() {
        std::fs::remove_file(&clean).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    write_shot_csv(&clean, &outcome.records).map_err(|e| CliError::Runtime(e.to_string()))?;
    let summary = pipeline::league_summary_csv(&outcome.records);
    std::fs::write(out.join("league_summary.csv"), summary).map_err(|e| CliError::Runtime(e.to_string()))?;
    println!(
        "ingested {} shots ({} own goals dropped, {} rows skipped)",
        outcome.records.len(),
        outcome.dropped_own_goals,
        outcome.skipped.len()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fetch {
            match_ids,
            cache,
            rate,
            league,
            base_url,
            out,
        } => cmd_fetch(&match_ids, cache, rate, &league, &base_url, &out),
        Command::Ingest { csv, out, strict } => cmd_ingest(&csv, &out, strict),
        Command::Train(args) => {
            let (config, _) = effective_config(&args)?;
            let prepared = pipeline::prepare(&config)?;
            std::fs::create_dir_all(&config.out_dir).map_err(|e| CliError::Runtime(e.to_string()))?;
            let path = config.out_dir.join("model.json");
            save_model(&prepared.model, &path).map_err(|e| CliError::Runtime(format!("stage persist: {e}")))?;
            println!(
                "trained {} on {} rows (balance: {}), saved to {}",
                config.model.kind,
                prepared.counts.balanced_rows,
                prepared.model.train_meta.balance_method,
                path.display()
            );
            Ok(())
        }
        Command::Evaluate(args) => {
            let (config, _) = effective_config(&args)?;
            let prepared = pipeline::obtain_model(&config)?;
            let metrics = pipeline::evaluate_on_test(&prepared, config.metrics.threshold)?;
            println!("{}", serde_json::to_string_pretty(&metrics).unwrap());
            Ok(())
        }
        Command::Score(args) => {
            let (config, _) = effective_config(&args)?;
            let prepared = pipeline::obtain_model(&config)?;
            let probs = pipeline::score_all(&prepared)?;
            std::fs::create_dir_all(&config.out_dir).map_err(|e| CliError::Runtime(e.to_string()))?;
            let path = config.out_dir.join("scores.csv");
            std::fs::write(&path, pipeline::scores_csv(&prepared.enriched, &probs))
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            println!("scored {} shots -> {}", probs.len(), path.display());
            Ok(())
        }
        Command::Report { common, group } => {
            let (config, _) = effective_config(&common)?;
            let spec = GroupSpec::parse(&group)?;
            let prepared = pipeline::obtain_model(&config)?;
            let probs = pipeline::score_all(&prepared)?;
            let pairs: (Vec<_>, Vec<_>) = prepared
                .enriched
                .iter()
                .zip(&probs)
                .filter(|(s, _)| spec.matches(&s.record))
                .map(|(s, &p)| (s.clone(), p))
                .unzip();
            if pairs.0.is_empty() {
                return Err(CliError::Validation(format!("group {:?} matches no shots", spec.label())));
            }
            if spec.player.is_some() {
                let report = xg_core::report::player_season_report(&pairs.0, &pairs.1)
                    .map_err(|e| CliError::Runtime(format!("stage report: {e}")))?;
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                let reports = pipeline::all_match_reports(&pairs.0, &pairs.1)?;
                println!("{}", serde_json::to_string_pretty(&reports).unwrap());
            }
            Ok(())
        }
        Command::Profile { common, feature, group } => {
            let (config, _) = effective_config(&common)?;
            let spec = group.as_deref().map(GroupSpec::parse).transpose()?.unwrap_or_default();
            let prepared = pipeline::obtain_model(&config)?;
            let curve = pipeline::profile_group(&prepared, &feature, config.profiles.m, &spec)?;
            std::fs::create_dir_all(&config.out_dir).map_err(|e| CliError::Runtime(e.to_string()))?;
            let base = format!("profile_{feature}");
            std::fs::write(config.out_dir.join(format!("{base}.csv")), pipeline::profile_csv(&curve))
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let svg = pipeline::profile_svg(&[&curve], &format!("Profile: {feature} ({})", curve.group_label))?;
            std::fs::write(config.out_dir.join(format!("{base}.svg")), svg)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            println!("wrote {base}.csv and {base}.svg to {}", config.out_dir.display());
            Ok(())
        }
        Command::Whatif {
            common,
            feature,
            from,
            to,
            group,
        } => {
            let (config, _) = effective_config(&common)?;
            let spec = group.as_deref().map(GroupSpec::parse).transpose()?.unwrap_or_default();
            let prepared = pipeline::obtain_model(&config)?;
            let answer = pipeline::what_if(&prepared, &feature, config.profiles.m, &spec, from, to)?;
            println!("{}", serde_json::to_string_pretty(&answer).unwrap());
            Ok(())
        }
        Command::Run(args) => {
            let (config, hash) = effective_config(&args)?;
            let manifest = pipeline::run_pipeline(&config, &hash)?;
            println!("run complete: {}", manifest.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Validation(_)) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e @ CliError::Runtime(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
