//! Deterministic synthetic shot corpus generator.
//!
//! Produces shot events with a known generative model: locations are drawn
//! near the attacked goal, and the goal probability is a logistic function
//! of the derived distance and angle. Useful for demos, the bundled sample
//! dataset, and verification against a ground-truth model.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};

use crate::data::{
    compute_angle, compute_distance, DerivedFeatures, EnrichedShot, HomeAway, League, ShotRecord,
    ShotResult, ShotType, Situation, GOAL_CENTER_W, PITCH_LENGTH, PITCH_WIDTH,
};

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub n: usize,
    pub seed: u64,
    /// Gamma shape/scale for the longitudinal distance to the goal line (m).
    pub gamma_shape: f64,
    pub gamma_scale: f64,
    /// Std-dev of the lateral offset from the goal center (m).
    pub lateral_sd: f64,
    pub intercept: f64,
    pub distance_coef: f64,
    pub angle_coef: f64,
    pub shots_per_match: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        // Tuned so the goal rate lands near 10%, mirroring real shot data.
        SyntheticConfig {
            n: 1000,
            seed: 0,
            gamma_shape: 3.2,
            gamma_scale: 10.0,
            lateral_sd: 15.0,
            intercept: 3.0,
            distance_coef: -0.25,
            angle_coef: 0.03,
            shots_per_match: 25,
        }
    }
}

impl SyntheticConfig {
    /// Ground-truth scoring probability for a shot at the given geometry.
    pub fn true_probability(&self, distance: f64, angle: f64) -> f64 {
        let z = self.intercept + self.distance_coef * distance + self.angle_coef * angle;
        1.0 / (1.0 + (-z).exp())
    }
}

const LEAGUES: [League; 5] = [League::Bundesliga, League::EPL, League::LaLiga, League::Ligue1, League::SerieA];
const SITUATIONS: [(Situation, f64); 5] = [
    (Situation::OpenPlay, 0.72),
    (Situation::FromCorner, 0.12),
    (Situation::SetPlay, 0.09),
    (Situation::DirectFreekick, 0.05),
    (Situation::Penalty, 0.02),
];
const SHOT_TYPES: [(ShotType, f64); 4] = [
    (ShotType::RightFoot, 0.52),
    (ShotType::LeftFoot, 0.29),
    (ShotType::Head, 0.17),
    (ShotType::OtherBodyPart, 0.02),
];
const LAST_ACTIONS: [&str; 8] = ["Pass", "Cross", "Rebound", "HeadPass", "TakeOn", "Throughball", "Standard", "None"];

fn weighted<T: Copy>(rng: &mut impl Rng, options: &[(T, f64)]) -> T {
    let mut u: f64 = rng.gen();
    for &(v, w) in options {
        if u < w {
            return v;
        }
        u -= w;
    }
    options[options.len() - 1].0
}

/// Generate `cfg.n` shots with geometry features and sampled goal labels.
pub fn generate_shots(cfg: &SyntheticConfig) -> Vec<EnrichedShot> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let gamma = Gamma::new(cfg.gamma_shape, cfg.gamma_scale).expect("valid gamma");
    let lateral = Normal::new(0.0, cfg.lateral_sd).expect("valid normal");

    let mut shots = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let match_idx = i / cfg.shots_per_match;
        let league = LEAGUES[match_idx % LEAGUES.len()];
        let home = match_idx % 2 == 0;

        let x: f64 = gamma.sample(&mut rng).clamp(0.5, 100.0);
        let y: f64 = lateral.sample(&mut rng).clamp(-32.0, 32.0);
        let coord_l = 1.0 - x / PITCH_LENGTH;
        let coord_w = (GOAL_CENTER_W - y) / PITCH_WIDTH;

        let distance = compute_distance(coord_l, coord_w).expect("in range");
        let angle = compute_angle(coord_l, coord_w).expect("x >= 0.5 never degenerate");
        let p = cfg.true_probability(distance, angle);
        let goal = rng.gen::<f64>() < p;

        let team_pair = match_idx % 40;
        let (team, opponent) = (format!("Team {:02}", 2 * team_pair), format!("Team {:02}", 2 * team_pair + 1));
        let record = ShotRecord {
            shot_id: format!("syn-{i:06}"),
            match_id: format!("mat-{match_idx:05}"),
            league,
            season: "2020-21".to_string(),
            date: format!("2021-01-{:02}", 1 + match_idx % 28),
            player: format!("Player {:03}", i % 120),
            team: if home { team } else { opponent },
            home_away: if home { HomeAway::Home } else { HomeAway::Away },
            minute: 1 + (rng.gen::<u32>() % 95),
            situation: weighted(&mut rng, &SITUATIONS),
            shot_type: weighted(&mut rng, &SHOT_TYPES),
            last_action: LAST_ACTIONS[rng.gen::<usize>() % LAST_ACTIONS.len()].to_string(),
            coord_l,
            coord_w,
            result: if goal { ShotResult::Goal } else { ShotResult::MissedShots },
            status: u8::from(goal),
        };
        shots.push(EnrichedShot {
            record,
            features: DerivedFeatures {
                distance_to_goal: distance,
                angle_to_goal: angle,
            },
        });
    }
    shots
}
