//! Provider client for match pages that embed their shot list as a
//! hex-escaped JSON payload inside a `<script>` block. Parsing is a targeted
//! marker scan plus unescape — no HTML parser — and raw pages are cached to
//! disk so everything downstream runs offline.

use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{HomeAway, League, ShotRecord, ShotResult, ShotType, Situation};

#[derive(Debug, Error)]
pub enum UnderstatError {
    #[error("page does not contain a shots-data payload")]
    PayloadNotFound,
    #[error("malformed payload JSON at byte {position}: {reason}")]
    MalformedJson { position: usize, reason: String },
    #[error("unknown provider value for {field}: {value:?}")]
    UnknownEnum { field: &'static str, value: String },
    #[error("bad provider value for {field}: {value:?}")]
    BadValue { field: &'static str, value: String },
    #[error("http status {0}")]
    HttpError(u16),
    #[error("request failed: {0}")]
    Request(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Accepts the provider's habit of sending numbers either bare or as strings.
fn de_string_or_number<'de, D>(de: D) -> Result<String, D::Error>
where
    D: serde::Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        S(String),
        I(i64),
        F(f64),
    }
    Ok(match Raw::deserialize(de)? {
        Raw::S(s) => s,
        Raw::I(i) => i.to_string(),
        Raw::F(f) => f.to_string(),
    })
}

/// One shot as it appears on the wire. Field names follow the provider's
/// payload exactly; extra payload fields are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawProviderShot {
    #[serde(deserialize_with = "de_string_or_number")]
    pub id: String,
    #[serde(deserialize_with = "de_string_or_number")]
    pub minute: String,
    pub result: String,
    #[serde(rename = "X", deserialize_with = "de_string_or_number")]
    pub x: String,
    #[serde(rename = "Y", deserialize_with = "de_string_or_number")]
    pub y: String,
    pub situation: String,
    #[serde(rename = "shotType")]
    pub shot_type: String,
    #[serde(rename = "lastAction")]
    pub last_action: String,
    pub h_a: String,
    pub player: String,
    pub h_team: String,
    pub a_team: String,
    #[serde(deserialize_with = "de_string_or_number")]
    pub match_id: String,
    #[serde(deserialize_with = "de_string_or_number")]
    pub season: String,
    pub date: String,
}

#[derive(Deserialize)]
struct ShotsPayload {
    h: Vec<RawProviderShot>,
    a: Vec<RawProviderShot>,
}

const PAYLOAD_MARKER: &str = "shotsData";
const PARSE_OPEN: &str = "JSON.parse('";

/// Undo the provider's JavaScript string escaping: `\xHH`, `\uHHHH`, and
/// backslash escapes of quotes and backslashes. Unknown escapes pass through
/// verbatim rather than failing, since they cannot hide structural JSON.
fn unescape_js(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\\' && i + 1 < bytes.len() {
            match bytes[i + 1] {
                b'x' if i + 3 < bytes.len() => {
                    if let Ok(v) = u8::from_str_radix(&s[i + 2..i + 4], 16) {
                        out.push(v);
                        i += 4;
                        continue;
                    }
                    out.push(bytes[i]);
                    i += 1;
                }
                b'u' if i + 5 < bytes.len() => {
                    if let Some(c) = u32::from_str_radix(&s[i + 2..i + 6], 16)
                        .ok()
                        .and_then(char::from_u32)
                    {
                        let mut buf = [0u8; 4];
                        out.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
                        i += 6;
                        continue;
                    }
                    out.push(bytes[i]);
                    i += 1;
                }
                b'\\' | b'\'' | b'"' => {
                    out.push(bytes[i + 1]);
                    i += 2;
                }
                _ => {
                    out.push(bytes[i]);
                    i += 1;
                }
            }
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8_lossy(&out).into_owned()
}

/// Extract and parse the embedded shot payload. Returns home shots followed
/// by away shots, preserving document order within each array.
pub fn parse_embedded_shots(html_page: &[u8]) -> Result<Vec<RawProviderShot>, UnderstatError> {
    let text = String::from_utf8_lossy(html_page);
    let marker = text.find(PAYLOAD_MARKER).ok_or(UnderstatError::PayloadNotFound)?;
    let after = &text[marker..];
    let open = after.find(PARSE_OPEN).ok_or(UnderstatError::PayloadNotFound)?;
    let body_start = open + PARSE_OPEN.len();
    // Scan for the closing unescaped quote of the JS string literal.
    let rest = &after[body_start..];
    let mut end = None;
    let rb = rest.as_bytes();
    let mut i = 0;
    while i < rb.len() {
        match rb[i] {
            b'\\' => i += 2,
            b'\'' => {
                end = Some(i);
                break;
            }
            _ => i += 1,
        }
    }
    let end = end.ok_or(UnderstatError::PayloadNotFound)?;
    let json = unescape_js(&rest[..end]);
    let payload: ShotsPayload = serde_json::from_str(&json).map_err(|e| UnderstatError::MalformedJson {
        position: e.column(),
        reason: e.to_string(),
    })?;
    let mut shots = payload.h;
    shots.extend(payload.a);
    Ok(shots)
}

fn map_situation(s: &str) -> Result<Situation, UnderstatError> {
    match s {
        "OpenPlay" => Ok(Situation::OpenPlay),
        "FromCorner" => Ok(Situation::FromCorner),
        "SetPiece" => Ok(Situation::SetPlay),
        "DirectFreekick" => Ok(Situation::DirectFreekick),
        "Penalty" => Ok(Situation::Penalty),
        other => Err(UnderstatError::UnknownEnum {
            field: "situation",
            value: other.to_string(),
        }),
    }
}

fn map_shot_type(s: &str) -> Result<ShotType, UnderstatError> {
    ShotType::parse(s).ok_or_else(|| UnderstatError::UnknownEnum {
        field: "shotType",
        value: s.to_string(),
    })
}

fn map_result(s: &str) -> Result<ShotResult, UnderstatError> {
    ShotResult::parse(s).ok_or_else(|| UnderstatError::UnknownEnum {
        field: "result",
        value: s.to_string(),
    })
}

fn parse_fraction(field: &'static str, s: &str) -> Result<f64, UnderstatError> {
    let v: f64 = s.parse().map_err(|_| UnderstatError::BadValue {
        field,
        value: s.to_string(),
    })?;
    if !(0.0..=1.0).contains(&v) {
        return Err(UnderstatError::BadValue {
            field,
            value: s.to_string(),
        });
    }
    Ok(v)
}

/// Map a wire-format shot onto the canonical record. Own goals pass through;
/// ingestion drops them later. Unknown enum values surface as errors rather
/// than being coerced, so provider vocabulary drift is loud.
pub fn normalize(raw: &RawProviderShot, league: League) -> Result<ShotRecord, UnderstatError> {
    let home_away = HomeAway::parse(&raw.h_a).ok_or_else(|| UnderstatError::UnknownEnum {
        field: "h_a",
        value: raw.h_a.clone(),
    })?;
    let result = map_result(&raw.result)?;
    let minute: u32 = raw.minute.parse().map_err(|_| UnderstatError::BadValue {
        field: "minute",
        value: raw.minute.clone(),
    })?;
    Ok(ShotRecord {
        shot_id: raw.id.clone(),
        match_id: raw.match_id.clone(),
        league,
        season: raw.season.clone(),
        date: raw.date.clone(),
        player: raw.player.clone(),
        team: match home_away {
            HomeAway::Home => raw.h_team.clone(),
            HomeAway::Away => raw.a_team.clone(),
        },
        home_away,
        minute,
        situation: map_situation(&raw.situation)?,
        shot_type: map_shot_type(&raw.shot_type)?,
        last_action: raw.last_action.clone(),
        coord_l: parse_fraction("X", &raw.x)?,
        coord_w: parse_fraction("Y", &raw.y)?,
        result,
        status: u8::from(result == ShotResult::Goal),
    })
}

/// Fetches match pages over HTTP with an on-disk write-once cache and a
/// client-side rate limit. `base_url` is overridable so tests can point at
/// a local server.
pub struct UnderstatClient {
    base_url: String,
    cache_dir: PathBuf,
    min_interval: Duration,
    last_request: Mutex<Option<Instant>>,
    league: League,
    http: reqwest::blocking::Client,
}

impl UnderstatClient {
    /// `rate` is the maximum number of requests per second.
    pub fn new(base_url: &str, cache_dir: &Path, rate: f64, league: League) -> UnderstatClient {
        assert!(rate > 0.0, "rate must be positive");
        UnderstatClient {
            base_url: base_url.trim_end_matches('/').to_string(),
            cache_dir: cache_dir.to_path_buf(),
            min_interval: Duration::from_secs_f64(1.0 / rate),
            last_request: Mutex::new(None),
            league,
            http: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(30))
                .build()
                .expect("http client"),
        }
    }

    fn cache_path(&self, match_id: &str) -> PathBuf {
        self.cache_dir.join(format!("{match_id}.html"))
    }

    fn throttle(&self) {
        let mut last = self.last_request.lock().unwrap();
        if let Some(t) = *last {
            let elapsed = t.elapsed();
            if elapsed < self.min_interval {
                std::thread::sleep(self.min_interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }

    /// Raw page bytes for a match, from cache when present.
    pub fn fetch_page(&self, match_id: &str) -> Result<Vec<u8>, UnderstatError> {
        let path = self.cache_path(match_id);
        if path.exists() {
            return Ok(std::fs::read(&path)?);
        }
        self.throttle();
        let url = format!("{}/match/{match_id}", self.base_url);
        let resp = self
            .http
            .get(&url)
            .send()
            .map_err(|e| UnderstatError::Request(e.to_string()))?;
        let status = resp.status().as_u16();
        if status != 200 {
            return Err(UnderstatError::HttpError(status));
        }
        let bytes = resp
            .bytes()
            .map_err(|e| UnderstatError::Request(e.to_string()))?
            .to_vec();
        std::fs::create_dir_all(&self.cache_dir)?;
        std::fs::write(&path, &bytes)?;
        Ok(bytes)
    }

    /// Download (or read cached) page, parse, and normalize every shot.
    pub fn fetch_match(&self, match_id: &str) -> Result<Vec<ShotRecord>, UnderstatError> {
        let page = self.fetch_page(match_id)?;
        parse_embedded_shots(&page)?
            .iter()
            .map(|raw| normalize(raw, self.league))
            .collect()
    }
}
