//! Shot geometry on a standardized 105 m x 68 m pitch.
//!
//! Raw coordinates arrive as fractions of pitch length/width with every shot
//! normalized to attack the goal at `coord_l = 1`. The goal center sits at
//! (105, 32.5) and the goal mouth is 7.32 m wide.

use thiserror::Error;

pub const PITCH_LENGTH: f64 = 105.0;
pub const PITCH_WIDTH: f64 = 68.0;
pub const GOAL_CENTER_W: f64 = 32.5;
pub const GOAL_MOUTH_WIDTH: f64 = 7.32;

const HALF_MOUTH: f64 = GOAL_MOUTH_WIDTH / 2.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("coordinates must be fractions in [0,1]")]
    OutOfRange,
    #[error("shot taken on the goal line inside the goal mouth")]
    Degenerate,
}

fn goal_offsets(coord_l: f64, coord_w: f64) -> Result<(f64, f64), GeometryError> {
    if !(0.0..=1.0).contains(&coord_l) || !(0.0..=1.0).contains(&coord_w) {
        return Err(GeometryError::OutOfRange);
    }
    let x = PITCH_LENGTH - PITCH_LENGTH * coord_l;
    let y = GOAL_CENTER_W - PITCH_WIDTH * coord_w;
    Ok((x, y))
}

/// Distance in meters from the shot location to the center of the attacked goal.
pub fn compute_distance(coord_l: f64, coord_w: f64) -> Result<f64, GeometryError> {
    let (x, y) = goal_offsets(coord_l, coord_w)?;
    Ok(x.hypot(y))
}

/// Angle in degrees under which the shot sees the goal mouth, folded into
/// (0, 90] via the principal-branch arctangent. On the circle through both
/// posts the denominator vanishes and the angle is exactly 90 degrees. Shots
/// on the goal line inside the mouth have no defined viewing angle and are
/// reported as `Degenerate` (callers may clamp to 90).
pub fn compute_angle(coord_l: f64, coord_w: f64) -> Result<f64, GeometryError> {
    let (x, y) = goal_offsets(coord_l, coord_w)?;
    if x == 0.0 && y.abs() <= HALF_MOUTH {
        return Err(GeometryError::Degenerate);
    }
    let denom = x * x + y * y - HALF_MOUTH * HALF_MOUTH;
    if denom == 0.0 {
        return Ok(90.0);
    }
    Ok(((GOAL_MOUTH_WIDTH * x) / denom).atan().abs().to_degrees())
}
