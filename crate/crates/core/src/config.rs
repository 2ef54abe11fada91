//! Scenario configuration files (TOML).
//!
//! ```toml
//! delta = 0.05
//! horizon = 1.0
//! claim = { kind = "exponential", mean = 1.0 }
//! counting = { kind = "mileage_affine", base = 0.1, per_mile = 0.005 }
//! mileage = { kind = "trip_log", path = "trips.csv" }
//!
//! [simulation]
//! paths = 100000
//! seed = 42
//! full_trace = false
//! ```
//!
//! Trip-log paths are resolved relative to the config file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::dcrm::DcrmScenario;
use crate::distributions::ClaimDistribution;
use crate::error::Error;
use crate::mileage::{MileageModel, TripLog};
use crate::processes::IntensityModel;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    fn from_model(section: &str, err: Error) -> Self {
        match err {
            Error::InvalidParameter { name, reason } => ConfigError::invalid(format!("{section}.{name}"), reason),
            other => ConfigError::invalid(section, other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationSettings {
    pub paths: usize,
    pub seed: u64,
    pub full_trace: bool,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        SimulationSettings {
            paths: 10_000,
            seed: 0,
            full_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: DcrmScenario,
    pub simulation: SimulationSettings,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    claim: ClaimDistribution,
    counting: IntensityModel,
    mileage: Option<RawMileage>,
    delta: f64,
    horizon: f64,
    #[serde(default)]
    simulation: RawSimulation,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawMileage {
    ConstantSpeed { speed: f64 },
    TripLog { path: PathBuf },
    AlternatingRenewal { mean_drive: f64, mean_idle: f64, speed: f64 },
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    paths: Option<i64>,
    seed: Option<u64>,
    full_trace: Option<bool>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml_str(&text, base)
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;

        raw.claim.validate().map_err(|e| ConfigError::from_model("claim", e))?;
        raw.counting.validate().map_err(|e| ConfigError::from_model("counting", e))?;
        if !(raw.delta.is_finite() && raw.delta >= 0.0) {
            return Err(ConfigError::invalid("delta", format!("must be finite and >= 0, got {}", raw.delta)));
        }
        if !(raw.horizon.is_finite() && raw.horizon > 0.0) {
            return Err(ConfigError::invalid("horizon", format!("must be finite and > 0, got {}", raw.horizon)));
        }

        let mileage = match raw.mileage {
            None => None,
            Some(RawMileage::ConstantSpeed { speed }) => Some(MileageModel::ConstantSpeed { speed }),
            Some(RawMileage::AlternatingRenewal {
                mean_drive,
                mean_idle,
                speed,
            }) => Some(MileageModel::AlternatingRenewal {
                mean_drive,
                mean_idle,
                speed,
            }),
            Some(RawMileage::TripLog { path }) => {
                let full = if path.is_absolute() { path } else { base_dir.join(path) };
                let file = fs::File::open(&full)
                    .map_err(|e| ConfigError::invalid("mileage.path", format!("{}: {e}", full.display())))?;
                let log = TripLog::from_csv(file)
                    .map_err(|e| ConfigError::invalid("mileage.path", format!("{}: {e}", full.display())))?;
                Some(MileageModel::FromTripLog(log))
            }
        };
        if let Some(m) = &mileage {
            m.validate().map_err(|e| ConfigError::from_model("mileage", e))?;
        }
        if matches!(raw.counting, IntensityModel::MileageAffine(_)) && mileage.is_none() {
            return Err(ConfigError::invalid("mileage", "required by a mileage_affine counting model"));
        }

        let defaults = SimulationSettings::default();
        let paths = match raw.simulation.paths {
            None => defaults.paths,
            Some(p) if p >= 1 => p as usize,
            Some(p) => return Err(ConfigError::invalid("simulation.paths", format!("must be >= 1, got {p}"))),
        };
        let simulation = SimulationSettings {
            paths,
            seed: raw.simulation.seed.unwrap_or(defaults.seed),
            full_trace: raw.simulation.full_trace.unwrap_or(defaults.full_trace),
        };

        Ok(ScenarioConfig {
            scenario: DcrmScenario {
                claim: raw.claim,
                intensity: raw.counting,
                mileage,
                delta: raw.delta,
                horizon: raw.horizon,
            },
            simulation,
        })
    }
}
