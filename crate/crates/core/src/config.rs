//! Scenario configuration: JSON schema, defaults and validation.
//!
//! Only `gnbs[].ncgi`, `gnbs[].tier` and `gnbs[].position` are required; every
//! other field falls back to the defaults below or to the per-tier radio
//! defaults in [`TierDefaults`].

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::geometry::{Obstacle, Point3, Trajectory};
use crate::hdma::HdmaConfig;
use crate::nci::{parse_ncgi, GnbType, Ncgi};
use crate::radio::{GnbConfig, TierDefaults};

pub const DEFAULT_SCENARIO_JSON: &str = include_str!("../scenarios/default_scenario.json");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: field `{field}`: {message}")]
    Parse {
        origin: String,
        field: String,
        message: String,
    },
    #[error("invalid scenario: {0}")]
    Validation(String),
}

impl Serialize for Ncgi {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ncgi {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_ncgi(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum TierName {
    Macro,
    Small,
    Mmwave,
}

impl From<TierName> for GnbType {
    fn from(t: TierName) -> Self {
        match t {
            TierName::Macro => GnbType::Macro,
            TierName::Small => GnbType::SmallSub6,
            TierName::Mmwave => GnbType::MmWave,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UeConfig {
    #[serde(default = "default_ue_start")]
    pub start: Point3,
    #[serde(default = "default_ue_direction")]
    pub direction: Point3,
    #[serde(default = "default_ue_speed")]
    pub speed_kmh: f64,
}

fn default_ue_start() -> Point3 {
    Point3::new(100.0, 100.0, 1.5)
}

fn default_ue_direction() -> Point3 {
    Point3::new(0.0, 1.0, 0.0)
}

fn default_ue_speed() -> f64 {
    60.0
}

impl Default for UeConfig {
    fn default() -> Self {
        Self {
            start: default_ue_start(),
            direction: default_ue_direction(),
            speed_kmh: default_ue_speed(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGnb {
    ncgi: Ncgi,
    tier: TierName,
    position: Point3,
    carrier_hz: Option<f64>,
    tx_power_dbm: Option<f64>,
    bandwidth_hz: Option<f64>,
    resource_share: Option<f64>,
    pl_exponent_los: Option<f64>,
    pl_exponent_nlos: Option<f64>,
    shadow_sigma_db: Option<f64>,
    blockage_penalty_db: Option<f64>,
}

impl RawGnb {
    fn resolve(self) -> GnbConfig {
        let tier = GnbType::from(self.tier);
        let d = TierDefaults::for_tier(tier).expect("named tiers have defaults");
        GnbConfig {
            ncgi: self.ncgi,
            tier,
            position: self.position,
            carrier_hz: self.carrier_hz.unwrap_or(d.carrier_hz),
            tx_power_dbm: self.tx_power_dbm.unwrap_or(d.tx_power_dbm),
            bandwidth_hz: self.bandwidth_hz.unwrap_or(d.bandwidth_hz),
            resource_share: self.resource_share.unwrap_or(d.resource_share),
            pl_exponent_los: self.pl_exponent_los.unwrap_or(d.pl_exponent_los),
            pl_exponent_nlos: self.pl_exponent_nlos.unwrap_or(d.pl_exponent_nlos),
            shadow_sigma_db: self.shadow_sigma_db.unwrap_or(d.shadow_sigma_db),
            blockage_penalty_db: self.blockage_penalty_db.unwrap_or(d.blockage_penalty_db),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default = "default_duration")]
    duration_s: f64,
    #[serde(default = "default_tick")]
    tick_ms: f64,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default)]
    ue: UeConfig,
    #[serde(default)]
    hdma: HdmaConfig,
    #[serde(default = "default_interruption")]
    sn_interruption_ms: f64,
    #[serde(default = "default_decorrelation")]
    shadow_decorrelation_m: f64,
    gnbs: Vec<RawGnb>,
    #[serde(default)]
    obstacles: Vec<Obstacle>,
}

fn default_duration() -> f64 {
    40.0
}

fn default_tick() -> f64 {
    1.0
}

fn default_seed() -> u64 {
    1
}

fn default_interruption() -> f64 {
    50.0
}

fn default_decorrelation() -> f64 {
    20.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub duration_s: f64,
    pub tick_ms: f64,
    pub seed: u64,
    pub ue: UeConfig,
    pub hdma: HdmaConfig,
    pub sn_interruption_ms: f64,
    pub shadow_decorrelation_m: f64,
    pub gnbs: Vec<GnbConfig>,
    pub obstacles: Vec<Obstacle>,
}

impl ScenarioConfig {
    /// Reads and validates a scenario file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    /// Parses and validates scenario JSON; `origin` names the source in errors.
    pub fn from_json_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawScenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            ConfigError::Parse {
                origin: origin.to_owned(),
                field: if field == "." { "<root>".into() } else { field },
                message: e.into_inner().to_string(),
            }
        })?;
        let cfg = ScenarioConfig {
            duration_s: raw.duration_s,
            tick_ms: raw.tick_ms,
            seed: raw.seed,
            ue: raw.ue,
            hdma: raw.hdma,
            sn_interruption_ms: raw.sn_interruption_ms,
            shadow_decorrelation_m: raw.shadow_decorrelation_m,
            gnbs: raw.gnbs.into_iter().map(RawGnb::resolve).collect(),
            obstacles: raw.obstacles,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The shipped default scenario.
    pub fn default_scenario() -> Self {
        Self::from_json_str(DEFAULT_SCENARIO_JSON, "default_scenario.json")
            .expect("shipped scenario is valid")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Validation(m));
        if !(self.duration_s >= 0.0 && self.duration_s.is_finite()) {
            return bad("duration_s must be finite and >= 0".into());
        }
        if !(self.tick_ms > 0.0 && self.tick_ms.is_finite()) {
            return bad("tick_ms must be > 0".into());
        }
        if !(self.sn_interruption_ms >= 0.0 && self.sn_interruption_ms.is_finite()) {
            return bad("sn_interruption_ms must be finite and >= 0".into());
        }
        if !(self.shadow_decorrelation_m > 0.0 && self.shadow_decorrelation_m.is_finite()) {
            return bad("shadow_decorrelation_m must be > 0".into());
        }
        self.hdma.check().map_err(ConfigError::Validation)?;
        self.trajectory()?;

        let macros = self.gnbs.iter().filter(|g| g.tier == GnbType::Macro).count();
        if macros != 1 {
            return bad(format!("exactly one macro gNB required, found {macros}"));
        }
        let mut seen = HashSet::new();
        for (i, g) in self.gnbs.iter().enumerate() {
            if !seen.insert(g.ncgi) {
                return bad(format!("gnbs[{i}]: duplicate NCGI {}", g.ncgi));
            }
            let bits = g.ncgi.gnb_type();
            if bits != g.tier {
                return bad(format!(
                    "gnbs[{i}]: tier `{}` disagrees with NCGI type bits `{:02b}` ({})",
                    g.tier,
                    bits.code(),
                    g.ncgi
                ));
            }
            g.check()
                .or_else(|m| bad(format!("gnbs[{i}]: {m}")))?;
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if Obstacle::new(o.min, o.max).is_none() {
                return bad(format!("obstacles[{i}]: min must be <= max and finite"));
            }
        }
        Ok(())
    }

    pub fn trajectory(&self) -> Result<Trajectory, ConfigError> {
        Trajectory::new(self.ue.start, self.ue.direction, self.ue.speed_kmh).ok_or_else(|| {
            ConfigError::Validation(
                "ue needs a finite start, a non-zero direction and speed >= 0".into(),
            )
        })
    }

    pub fn total_ticks(&self) -> u64 {
        (self.duration_s * 1000.0 / self.tick_ms).round() as u64
    }

    pub fn interruption_ticks(&self) -> u64 {
        (self.sn_interruption_ms / self.tick_ms).round() as u64
    }

    pub fn macro_gnb(&self) -> Option<&GnbConfig> {
        self.gnbs.iter().find(|g| g.tier == GnbType::Macro)
    }
}
