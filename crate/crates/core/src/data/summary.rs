use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::shot::ShotRecord;

/// One row of the per-league summary table. The pooled "Total" row leaves
/// the per-match means and conversion unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeagueSummary {
    pub label: String,
    pub match_count: usize,
    pub shot_count: usize,
    pub mean_shots_per_match: Option<f64>,
    pub goal_count: usize,
    pub mean_goals_per_match: Option<f64>,
    pub conversion_percent: Option<f64>,
}

/// Per-league shot/goal statistics plus pooled "Mean" and "Total" footer
/// rows. Leagues without shots are omitted. The "Mean" row averages the
/// per-league rows; the "Total" row sums raw counts.
pub fn summarize_league(records: &[ShotRecord]) -> Vec<LeagueSummary> {
    #[derive(Default)]
    struct Acc {
        matches: BTreeSet<String>,
        shots: usize,
        goals: usize,
    }

    let mut by_league: BTreeMap<&'static str, Acc> = BTreeMap::new();
    for r in records {
        let acc = by_league.entry(r.league.as_str()).or_default();
        acc.matches.insert(r.match_id.clone());
        acc.shots += 1;
        acc.goals += usize::from(r.status == 1);
    }

    let mut rows: Vec<LeagueSummary> = by_league
        .iter()
        .map(|(league, acc)| {
            let m = acc.matches.len() as f64;
            LeagueSummary {
                label: league.to_string(),
                match_count: acc.matches.len(),
                shot_count: acc.shots,
                mean_shots_per_match: Some(acc.shots as f64 / m),
                goal_count: acc.goals,
                mean_goals_per_match: Some(acc.goals as f64 / m),
                conversion_percent: Some(100.0 * acc.goals as f64 / acc.shots as f64),
            }
        })
        .collect();

    if !rows.is_empty() {
        let k = rows.len() as f64;
        let mean = |f: &dyn Fn(&LeagueSummary) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / k;
        rows.push(LeagueSummary {
            label: "Mean".to_string(),
            match_count: (mean(&|r| r.match_count as f64)).round() as usize,
            shot_count: (mean(&|r| r.shot_count as f64)).round() as usize,
            mean_shots_per_match: Some(mean(&|r| r.mean_shots_per_match.unwrap())),
            goal_count: (mean(&|r| r.goal_count as f64)).round() as usize,
            mean_goals_per_match: Some(mean(&|r| r.mean_goals_per_match.unwrap())),
            conversion_percent: Some(mean(&|r| r.conversion_percent.unwrap())),
        });
        let leagues = &rows[..rows.len() - 1];
        rows.push(LeagueSummary {
            label: "Total".to_string(),
            match_count: leagues.iter().map(|r| r.match_count).sum(),
            shot_count: leagues.iter().map(|r| r.shot_count).sum(),
            mean_shots_per_match: None,
            goal_count: leagues.iter().map(|r| r.goal_count).sum(),
            mean_goals_per_match: None,
            conversion_percent: None,
        });
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{League, ShotRecord, ShotResult};

    fn shot(league: League, match_id: &str, goal: bool) -> ShotRecord {
        let mut r = ShotRecord::sample();
        r.league = league;
        r.match_id = match_id.to_string();
        r.result = if goal { ShotResult::Goal } else { ShotResult::MissedShots };
        r.status = u8::from(goal);
        r
    }

    #[test]
    fn single_match_conversion() {
        let mut shots: Vec<ShotRecord> = (0..9).map(|_| shot(League::EPL, "m1", false)).collect();
        shots.push(shot(League::EPL, "m1", true));
        let rows = summarize_league(&shots);
        let epl = &rows[0];
        assert_eq!(epl.label, "EPL");
        assert_eq!(epl.match_count, 1);
        assert_eq!(epl.shot_count, 10);
        assert_eq!(epl.conversion_percent, Some(10.0));
        assert_eq!(epl.mean_shots_per_match, Some(10.0));
    }

    #[test]
    fn pooled_footer_rows_recompute_from_league_rows() {
        let mut shots = Vec::new();
        // EPL: 2 matches, 8 shots, 2 goals; SerieA: 1 match, 4 shots, 1 goal
        for i in 0..8 {
            shots.push(shot(League::EPL, if i < 4 { "e1" } else { "e2" }, i % 4 == 0));
        }
        for i in 0..4 {
            shots.push(shot(League::SerieA, "s1", i == 0));
        }
        let rows = summarize_league(&shots);
        assert_eq!(rows.len(), 4); // 2 leagues + Mean + Total
        let mean = rows.iter().find(|r| r.label == "Mean").unwrap();
        let total = rows.iter().find(|r| r.label == "Total").unwrap();

        // Independent recomputation from the per-league rows.
        let leagues: Vec<&LeagueSummary> =
            rows.iter().filter(|r| r.label != "Mean" && r.label != "Total").collect();
        let pooled_shots: usize = leagues.iter().map(|r| r.shot_count).sum();
        let mean_conv: f64 =
            leagues.iter().map(|r| r.conversion_percent.unwrap()).sum::<f64>() / leagues.len() as f64;
        assert_eq!(total.shot_count, pooled_shots);
        assert_eq!(total.match_count, 3);
        assert_eq!(total.mean_shots_per_match, None);
        assert!((mean.conversion_percent.unwrap() - mean_conv).abs() < 1e-12);
    }

    #[test]
    fn empty_input_yields_no_rows() {
        assert!(summarize_league(&[]).is_empty());
    }
}
