//! Shot CSV ingestion and export.
//!
//! The canonical on-disk shot format is UTF-8, comma-separated, RFC-4180
//! quoted, with the exact header in [`SHOT_CSV_HEADER`].

use std::path::Path;

use super::shot::{HomeAway, League, ShotRecord, ShotResult, ShotType, Situation};
use super::DataError;

pub const SHOT_CSV_HEADER: [&str; 15] = [
    "shot_id",
    "match_id",
    "league",
    "season",
    "date",
    "player",
    "team",
    "home_away",
    "minute",
    "situation",
    "shot_type",
    "last_action",
    "coord_l",
    "coord_w",
    "result",
];

#[derive(Debug)]
pub struct ParseOutcome {
    pub records: Vec<ShotRecord>,
    pub dropped_own_goals: usize,
    /// (1-based data row, reason) for rows skipped in non-strict mode.
    pub skipped: Vec<(usize, String)>,
}

fn parse_row(row_idx: usize, row: &csv::StringRecord) -> Result<ShotRecord, DataError> {
    let field = |i: usize| row.get(i).unwrap_or("").trim();

    let league = League::parse(field(2))
        .ok_or_else(|| DataError::bad_value(row_idx, "league", format!("unknown league {:?}", field(2))))?;
    let date = field(4);
    chrono::NaiveDate::parse_from_str(date, "%Y-%m-%d")
        .map_err(|_| DataError::bad_value(row_idx, "date", format!("not an ISO-8601 date: {date:?}")))?;
    let home_away = HomeAway::parse(field(7))
        .ok_or_else(|| DataError::bad_value(row_idx, "home_away", format!("expected home/away, got {:?}", field(7))))?;
    let minute: u32 = field(8)
        .parse()
        .map_err(|_| DataError::bad_value(row_idx, "minute", format!("not an integer: {:?}", field(8))))?;
    if minute < 1 {
        return Err(DataError::bad_value(row_idx, "minute", "minute must be >= 1"));
    }
    let situation = Situation::parse(field(9))
        .ok_or_else(|| DataError::bad_value(row_idx, "situation", format!("unknown situation {:?}", field(9))))?;
    let shot_type = ShotType::parse(field(10))
        .ok_or_else(|| DataError::bad_value(row_idx, "shot_type", format!("unknown shot type {:?}", field(10))))?;
    let coord_l: f64 = field(12)
        .parse()
        .map_err(|_| DataError::bad_value(row_idx, "coord_l", format!("not a number: {:?}", field(12))))?;
    let coord_w: f64 = field(13)
        .parse()
        .map_err(|_| DataError::bad_value(row_idx, "coord_w", format!("not a number: {:?}", field(13))))?;
    for (name, v) in [("coord_l", coord_l), ("coord_w", coord_w)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(DataError::bad_value(row_idx, name, format!("{v} outside [0,1]")));
        }
    }
    let result = ShotResult::parse(field(14))
        .ok_or_else(|| DataError::bad_value(row_idx, "result", format!("unknown result {:?}", field(14))))?;

    Ok(ShotRecord {
        shot_id: field(0).to_string(),
        match_id: field(1).to_string(),
        league,
        season: field(3).to_string(),
        date: date.to_string(),
        player: field(5).to_string(),
        team: field(6).to_string(),
        home_away,
        minute,
        situation,
        shot_type,
        last_action: field(11).to_string(),
        coord_l,
        coord_w,
        result,
        status: u8::from(result == ShotResult::Goal),
    })
}

/// Parse a shot CSV. Own-goal rows are dropped and counted. In strict mode
/// the first malformed row aborts the parse; otherwise malformed rows are
/// skipped and reported in the outcome.
pub fn parse_shot_csv(path: &Path, strict: bool) -> Result<ParseOutcome, DataError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;

    let headers = reader.headers()?.clone();
    for expected in SHOT_CSV_HEADER {
        if !headers.iter().any(|h| h == expected) {
            return Err(DataError::MissingColumn(expected.to_string()));
        }
    }
    // Column order is part of the contract; verify positionally too.
    for (i, expected) in SHOT_CSV_HEADER.iter().enumerate() {
        if headers.get(i) != Some(expected) {
            return Err(DataError::SchemaMismatch(format!(
                "column {i} must be {expected}, found {:?}",
                headers.get(i)
            )));
        }
    }

    let mut outcome = ParseOutcome {
        records: Vec::new(),
        dropped_own_goals: 0,
        skipped: Vec::new(),
    };
    let mut row_idx = 0usize;
    for row in reader.records() {
        row_idx += 1;
        let row = row?;
        match parse_row(row_idx, &row) {
            Ok(rec) => {
                if rec.result == ShotResult::OwnGoal {
                    outcome.dropped_own_goals += 1;
                } else {
                    outcome.records.push(rec);
                }
            }
            Err(e) if strict => return Err(e),
            Err(e) => {
                log::warn!("skipping row {row_idx}: {e}");
                outcome.skipped.push((row_idx, e.to_string()));
            }
        }
    }
    if row_idx == 0 {
        return Err(DataError::EmptyFile);
    }
    Ok(outcome)
}

/// Append records to a shot CSV, writing the header if the file is new.
pub fn write_shot_csv(path: &Path, records: &[ShotRecord]) -> Result<(), DataError> {
    let exists = path.exists() && std::fs::metadata(path)?.len() > 0;
    let file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if !exists {
        writer.write_record(SHOT_CSV_HEADER)?;
    }
    for r in records {
        writer.write_record([
            r.shot_id.as_str(),
            r.match_id.as_str(),
            r.league.as_str(),
            r.season.as_str(),
            r.date.as_str(),
            r.player.as_str(),
            r.team.as_str(),
            r.home_away.as_str(),
            &r.minute.to_string(),
            r.situation.as_str(),
            r.shot_type.as_str(),
            r.last_action.as_str(),
            &format!("{}", r.coord_l),
            &format!("{}", r.coord_w),
            r.result.as_str(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
