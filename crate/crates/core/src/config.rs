//! Experiment configuration files.
//!
//! The format is TOML with the sections `thermal`, `gas`, `control`,
//! `sensor_temp`, `sensor_co2`, `gate`, `sim` and an `[[events]]` array.
//! Every section and key is optional and falls back to the built-in default;
//! unknown sections or keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::control::ControlConfig;
use crate::engine::{Event, SimConfig, SimSettings};
use crate::error::Violation;
use crate::gating::GatePolicy;
use crate::plant::{GasParams, ThermalParams};
use crate::sensing::SensorModel;

/// Contents of the shipped `configs/default.toml`.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../configs/default.toml");

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid configuration:\n{}", .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Violation>),
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub(crate) struct RawConfig {
    thermal: ThermalParams,
    gas: GasParams,
    control: ControlConfig,
    sensor_temp: PartialSensor,
    sensor_co2: PartialSensor,
    gate: GatePolicy,
    sim: SimSettings,
    events: Vec<Event>,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct PartialSensor {
    period: Option<f64>,
    noise_sigma: Option<f64>,
    resolution: Option<f64>,
    gain: Option<f64>,
    offset: Option<f64>,
}

impl PartialSensor {
    fn over(self, d: SensorModel) -> SensorModel {
        SensorModel {
            period: self.period.unwrap_or(d.period),
            noise_sigma: self.noise_sigma.unwrap_or(d.noise_sigma),
            resolution: self.resolution.unwrap_or(d.resolution),
            gain: self.gain.unwrap_or(d.gain),
            offset: self.offset.unwrap_or(d.offset),
        }
    }
}

impl From<RawConfig> for SimConfig {
    fn from(r: RawConfig) -> Self {
        SimConfig {
            thermal: r.thermal,
            gas: r.gas,
            control: r.control,
            sensor_temp: r.sensor_temp.over(SensorModel::temperature()),
            sensor_co2: r.sensor_co2.over(SensorModel::co2()),
            gate: r.gate,
            sim: r.sim,
            events: r.events,
        }
    }
}

/// Parses without validating values.
pub fn parse_unchecked(text: &str) -> Result<SimConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string().trim_end().to_string()))
}

/// Parses and validates, reporting every violation at once.
pub fn parse(text: &str) -> Result<SimConfig, ConfigError> {
    let cfg = parse_unchecked(text)?;
    check(&cfg)?;
    Ok(cfg)
}

pub fn check(cfg: &SimConfig) -> Result<(), ConfigError> {
    let v = cfg.violations();
    if v.is_empty() {
        Ok(())
    } else {
        Err(ConfigError::Invalid(v))
    }
}

pub fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load(path: &Path) -> Result<SimConfig, ConfigError> {
    parse(&read(path)?)
}

/// Resolved config in the file format, every default spelled out.
pub fn to_toml(cfg: &SimConfig) -> String {
    toml::to_string(cfg).unwrap_or_else(|e| format!("# unable to render config: {e}\n"))
}
