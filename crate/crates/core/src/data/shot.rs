use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum League {
    Bundesliga,
    EPL,
    LaLiga,
    Ligue1,
    SerieA,
    Other,
}

impl League {
    pub fn parse(s: &str) -> Option<League> {
        match s {
            "Bundesliga" => Some(League::Bundesliga),
            "EPL" => Some(League::EPL),
            "LaLiga" | "La_liga" | "La Liga" => Some(League::LaLiga),
            "Ligue1" | "Ligue_1" | "Ligue 1" => Some(League::Ligue1),
            "SerieA" | "Serie_A" | "Serie A" => Some(League::SerieA),
            "Other" => Some(League::Other),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            League::Bundesliga => "Bundesliga",
            League::EPL => "EPL",
            League::LaLiga => "LaLiga",
            League::Ligue1 => "Ligue1",
            League::SerieA => "SerieA",
            League::Other => "Other",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HomeAway {
    Home,
    Away,
}

impl HomeAway {
    pub fn parse(s: &str) -> Option<HomeAway> {
        match s {
            "home" | "h" => Some(HomeAway::Home),
            "away" | "a" => Some(HomeAway::Away),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            HomeAway::Home => "home",
            HomeAway::Away => "away",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Situation {
    DirectFreekick,
    FromCorner,
    OpenPlay,
    Penalty,
    SetPlay,
}

impl Situation {
    pub const ALL: [Situation; 5] = [
        Situation::DirectFreekick,
        Situation::FromCorner,
        Situation::OpenPlay,
        Situation::Penalty,
        Situation::SetPlay,
    ];

    pub fn parse(s: &str) -> Option<Situation> {
        match s {
            "DirectFreekick" => Some(Situation::DirectFreekick),
            "FromCorner" => Some(Situation::FromCorner),
            "OpenPlay" => Some(Situation::OpenPlay),
            "Penalty" => Some(Situation::Penalty),
            "SetPlay" => Some(Situation::SetPlay),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Situation::DirectFreekick => "DirectFreekick",
            Situation::FromCorner => "FromCorner",
            Situation::OpenPlay => "OpenPlay",
            Situation::Penalty => "Penalty",
            Situation::SetPlay => "SetPlay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShotType {
    Head,
    LeftFoot,
    RightFoot,
    OtherBodyPart,
}

impl ShotType {
    pub const ALL: [ShotType; 4] = [
        ShotType::Head,
        ShotType::LeftFoot,
        ShotType::RightFoot,
        ShotType::OtherBodyPart,
    ];

    pub fn parse(s: &str) -> Option<ShotType> {
        match s {
            "Head" => Some(ShotType::Head),
            "LeftFoot" => Some(ShotType::LeftFoot),
            "RightFoot" => Some(ShotType::RightFoot),
            "OtherBodyPart" => Some(ShotType::OtherBodyPart),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ShotType::Head => "Head",
            ShotType::LeftFoot => "LeftFoot",
            ShotType::RightFoot => "RightFoot",
            ShotType::OtherBodyPart => "OtherBodyPart",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShotResult {
    Goal,
    MissedShots,
    SavedShot,
    BlockedShot,
    ShotOnPost,
    OwnGoal,
}

impl ShotResult {
    pub fn parse(s: &str) -> Option<ShotResult> {
        match s {
            "Goal" => Some(ShotResult::Goal),
            "MissedShots" => Some(ShotResult::MissedShots),
            "SavedShot" => Some(ShotResult::SavedShot),
            "BlockedShot" => Some(ShotResult::BlockedShot),
            "ShotOnPost" => Some(ShotResult::ShotOnPost),
            "OwnGoal" => Some(ShotResult::OwnGoal),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ShotResult::Goal => "Goal",
            ShotResult::MissedShots => "MissedShots",
            ShotResult::SavedShot => "SavedShot",
            ShotResult::BlockedShot => "BlockedShot",
            ShotResult::ShotOnPost => "ShotOnPost",
            ShotResult::OwnGoal => "OwnGoal",
        }
    }
}

/// One shot event. `status` is the binary training label: 1 iff the shot
/// was a goal. Own-goal records may exist transiently (provider pass-through)
/// but never survive CSV ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub shot_id: String,
    pub match_id: String,
    pub league: League,
    pub season: String,
    pub date: String,
    pub player: String,
    pub team: String,
    pub home_away: HomeAway,
    pub minute: u32,
    pub situation: Situation,
    pub shot_type: ShotType,
    pub last_action: String,
    pub coord_l: f64,
    pub coord_w: f64,
    pub result: ShotResult,
    pub status: u8,
}

impl ShotRecord {
    /// A valid open-play record useful as a test fixture base.
    pub fn sample() -> ShotRecord {
        ShotRecord {
            shot_id: "shot-1".into(),
            match_id: "match-1".into(),
            league: League::Bundesliga,
            season: "2020-21".into(),
            date: "2021-01-24".into(),
            player: "Player A".into(),
            team: "Team A".into(),
            home_away: HomeAway::Home,
            minute: 10,
            situation: Situation::OpenPlay,
            shot_type: ShotType::RightFoot,
            last_action: "Pass".into(),
            coord_l: 0.9,
            coord_w: 0.5,
            result: ShotResult::MissedShots,
            status: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedFeatures {
    pub distance_to_goal: f64,
    pub angle_to_goal: f64,
}

/// A shot record with its engineered geometry features attached. Raw
/// coordinates stay on the record for provenance but are not encoded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedShot {
    pub record: ShotRecord,
    pub features: DerivedFeatures,
}
