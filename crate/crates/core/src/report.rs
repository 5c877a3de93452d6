//! Aggregation of per-shot goal probabilities into match and player-season
//! reports, plus a small dependency-free SVG line renderer for profile and
//! calibration curves.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::EnrichedShot;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("shots and predictions have different lengths: {shots} vs {preds}")]
    LengthMismatch { shots: usize, preds: usize },
    #[error("shots span more than one match: {0} and {1}")]
    MixedMatches(String, String),
    #[error("shots span more than one player: {0} and {1}")]
    MixedPlayers(String, String),
    #[error("no shots to report on")]
    Empty,
    #[error("curve has no points")]
    EmptyCurve,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn check_lengths(shots: &[EnrichedShot], probs: &[f64]) -> Result<(), ReportError> {
    if shots.len() != probs.len() {
        return Err(ReportError::LengthMismatch {
            shots: shots.len(),
            preds: probs.len(),
        });
    }
    Ok(())
}

/// Expected goals of a set of shots: the sum of their goal probabilities.
pub fn xg_sum(probs: &[f64]) -> f64 {
    probs.iter().sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamLine {
    pub team: String,
    pub shots: usize,
    pub goals: u32,
    pub xg: f64,
    pub mean_angle: f64,
    pub mean_distance: f64,
    /// Actual goals minus expected goals.
    pub offensive_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub match_id: String,
    pub date: String,
    pub teams: Vec<TeamLine>,
}

/// Summarize one match: per-team shot count, actual goals, total xG, mean
/// shot geometry, and offensive efficiency. All shots must share a match id.
pub fn match_report(shots: &[EnrichedShot], probs: &[f64]) -> Result<MatchReport, ReportError> {
    check_lengths(shots, probs)?;
    let first = shots.first().ok_or(ReportError::Empty)?;
    struct Acc {
        shots: usize,
        goals: u32,
        xg: f64,
        angle_sum: f64,
        dist_sum: f64,
    }
    let mut teams: BTreeMap<String, Acc> = BTreeMap::new();
    for (shot, &p) in shots.iter().zip(probs) {
        let rec = &shot.record;
        if rec.match_id != first.record.match_id {
            return Err(ReportError::MixedMatches(
                first.record.match_id.clone(),
                rec.match_id.clone(),
            ));
        }
        let acc = teams.entry(rec.team.clone()).or_insert(Acc {
            shots: 0,
            goals: 0,
            xg: 0.0,
            angle_sum: 0.0,
            dist_sum: 0.0,
        });
        acc.shots += 1;
        acc.goals += u32::from(rec.status);
        acc.xg += p;
        acc.angle_sum += shot.features.angle_to_goal;
        acc.dist_sum += shot.features.distance_to_goal;
    }
    Ok(MatchReport {
        match_id: first.record.match_id.clone(),
        date: first.record.date.clone(),
        teams: teams
            .into_iter()
            .map(|(team, a)| TeamLine {
                team,
                shots: a.shots,
                goals: a.goals,
                xg: a.xg,
                mean_angle: a.angle_sum / a.shots as f64,
                mean_distance: a.dist_sum / a.shots as f64,
                offensive_efficiency: f64::from(a.goals) - a.xg,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSeasonReport {
    pub player: String,
    pub team: String,
    pub season: String,
    /// Distinct matches the player took a shot in.
    pub games: usize,
    pub shots: usize,
    pub goals: u32,
    pub xg: f64,
    pub mean_angle: f64,
    pub mean_distance: f64,
    /// Goals per shot, as a percentage.
    pub conversion_percent: f64,
    /// Goals minus expected goals: positive means the player finished
    /// better than an average shooter from the same positions.
    pub offensive_efficiency: f64,
}

/// Season line for one player. All shots must belong to the same player;
/// team and season are taken from the most recent shot by date.
pub fn player_season_report(shots: &[EnrichedShot], probs: &[f64]) -> Result<PlayerSeasonReport, ReportError> {
    check_lengths(shots, probs)?;
    let first = shots.first().ok_or(ReportError::Empty)?;
    let mut games = std::collections::BTreeSet::new();
    let mut goals = 0u32;
    let mut angle_sum = 0.0;
    let mut dist_sum = 0.0;
    let mut latest = first;
    for shot in shots {
        let rec = &shot.record;
        if rec.player != first.record.player {
            return Err(ReportError::MixedPlayers(
                first.record.player.clone(),
                rec.player.clone(),
            ));
        }
        games.insert(rec.match_id.as_str());
        goals += u32::from(rec.status);
        angle_sum += shot.features.angle_to_goal;
        dist_sum += shot.features.distance_to_goal;
        if rec.date > latest.record.date {
            latest = shot;
        }
    }
    let xg = xg_sum(probs);
    Ok(PlayerSeasonReport {
        player: first.record.player.clone(),
        team: latest.record.team.clone(),
        season: latest.record.season.clone(),
        games: games.len(),
        shots: shots.len(),
        goals,
        xg,
        mean_angle: angle_sum / shots.len() as f64,
        mean_distance: dist_sum / shots.len() as f64,
        conversion_percent: 100.0 * f64::from(goals) / shots.len() as f64,
        offensive_efficiency: f64::from(goals) - xg,
    })
}

/// Group shots by player and report every player, sorted by xG descending
/// (ties broken by name so the order is total).
pub fn player_season_table(shots: &[EnrichedShot], probs: &[f64]) -> Result<Vec<PlayerSeasonReport>, ReportError> {
    check_lengths(shots, probs)?;
    let mut by_player: BTreeMap<&str, (Vec<EnrichedShot>, Vec<f64>)> = BTreeMap::new();
    for (shot, &p) in shots.iter().zip(probs) {
        let entry = by_player.entry(&shot.record.player).or_default();
        entry.0.push(shot.clone());
        entry.1.push(p);
    }
    let mut out: Vec<PlayerSeasonReport> = by_player
        .values()
        .map(|(s, p)| player_season_report(s, p))
        .collect::<Result<_, _>>()?;
    out.sort_by(|a, b| b.xg.partial_cmp(&a.xg).unwrap().then_with(|| a.player.cmp(&b.player)));
    Ok(out)
}

/// One named line on an SVG chart.
#[derive(Debug, Clone)]
pub struct SvgCurve {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// CSS color, e.g. "#1f77b4".
    pub color: String,
}

const SVG_WIDTH: f64 = 720.0;
const SVG_HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render curves on shared axes as a standalone SVG document. Coordinates
/// are formatted with fixed precision so output is byte-stable across runs.
pub fn render_curves_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    curves: &[SvgCurve],
) -> Result<String, ReportError> {
    if curves.iter().all(|c| c.xs.is_empty()) {
        return Err(ReportError::EmptyCurve);
    }
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for c in curves {
        for &x in &c.xs {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
        }
        for &y in &c.ys {
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if x_max == x_min {
        x_max = x_min + 1.0;
    }
    if y_max == y_min {
        y_max = y_min + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x_min) / (x_max - x_min) * (SVG_WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| SVG_HEIGHT - MARGIN - (y - y_min) / (y_max - y_min) * (SVG_HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" viewBox=\"0 0 {SVG_WIDTH} {SVG_HEIGHT}\">"
    )
    .unwrap();
    writeln!(svg, "  <rect width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" fill=\"white\"/>").unwrap();
    writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>",
        SVG_WIDTH / 2.0,
        xml_escape(title)
    )
    .unwrap();
    // axes
    writeln!(
        svg,
        "  <line x1=\"{m:.1}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>",
        m = MARGIN,
        b = SVG_HEIGHT - MARGIN,
        r = SVG_WIDTH - MARGIN
    )
    .unwrap();
    writeln!(
        svg,
        "  <line x1=\"{m:.1}\" y1=\"{t:.1}\" x2=\"{m:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>",
        m = MARGIN,
        t = MARGIN,
        b = SVG_HEIGHT - MARGIN
    )
    .unwrap();
    // axis extent labels
    writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{:.3}</text>",
        MARGIN,
        SVG_HEIGHT - MARGIN + 18.0,
        x_min
    )
    .unwrap();
    writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{:.3}</text>",
        SVG_WIDTH - MARGIN,
        SVG_HEIGHT - MARGIN + 18.0,
        x_max
    )
    .unwrap();
    writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{:.3}</text>",
        MARGIN - 6.0,
        SVG_HEIGHT - MARGIN,
        y_min
    )
    .unwrap();
    writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{:.3}</text>",
        MARGIN - 6.0,
        MARGIN + 4.0,
        y_max
    )
    .unwrap();
    writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">{}</text>",
        SVG_WIDTH / 2.0,
        SVG_HEIGHT - 16.0,
        xml_escape(x_label)
    )
    .unwrap();
    writeln!(
        svg,
        "  <text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 {:.1})\">{}</text>",
        SVG_HEIGHT / 2.0,
        SVG_HEIGHT / 2.0,
        xml_escape(y_label)
    )
    .unwrap();

    for (i, c) in curves.iter().enumerate() {
        let pts: Vec<String> = c
            .xs
            .iter()
            .zip(&c.ys)
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        writeln!(
            svg,
            "  <polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\" points=\"{}\"/>",
            xml_escape(&c.color),
            pts.join(" ")
        )
        .unwrap();
        // legend swatch + label in the top-right corner
        let ly = MARGIN + 8.0 + 18.0 * i as f64;
        writeln!(
            svg,
            "  <line x1=\"{x1:.1}\" y1=\"{ly:.1}\" x2=\"{x2:.1}\" y2=\"{ly:.1}\" stroke=\"{col}\" stroke-width=\"2.5\"/>",
            x1 = SVG_WIDTH - MARGIN - 140.0,
            x2 = SVG_WIDTH - MARGIN - 118.0,
            col = xml_escape(&c.color),
        )
        .unwrap();
        writeln!(
            svg,
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            SVG_WIDTH - MARGIN - 112.0,
            ly + 4.0,
            xml_escape(&c.label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
