//! Scenario configuration files.
//!
//! ```json
//! {
//!   "network": "paper",
//!   "mu_deg": 30.0,
//!   "law": "differential",
//!   "dt_ms": 1.0,
//!   "sample_ms": 100.0,
//!   "robot": { "input_rpm": 120.0 },
//!   "gear": { "k": 20.0 }
//! }
//! ```
//!
//! `network` is either the name of a preset or an inline network descriptor.
//! Every field except `network` is optional and falls back to the defaults.
//! Field names carry their units; nothing is inferred.

use crate::error::{Error, Result};
use crate::geartrain::GearParams;
use crate::pipe_geometry::{paper_network, NetworkDescriptor, Orientation, PipeNetwork};
use crate::speed_law::DEFAULT_LAW;
use crate::traversal::{RobotConfig, DEFAULT_DT_S, DEFAULT_SAMPLE_S};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::PathBuf;

pub const PAPER_PRESET: &str = "paper";

#[derive(Clone, Debug, PartialEq)]
pub enum NetworkSource {
    Preset(String),
    Inline(NetworkDescriptor),
}

impl NetworkSource {
    pub fn build(&self) -> Result<PipeNetwork> {
        match self {
            NetworkSource::Preset(name) if name == PAPER_PRESET => Ok(paper_network()),
            NetworkSource::Preset(name) => Err(Error::config(
                "network",
                format!("unknown preset `{name}` (known: {PAPER_PRESET})"),
            )),
            NetworkSource::Inline(descriptor) => {
                descriptor.clone().into_network().map_err(|e| match e {
                    Error::Config { field, message } => Error::Config {
                        field: format!("network.{field}"),
                        message,
                    },
                    other => other,
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub network: NetworkSource,
    pub mu_deg: f64,
    pub law: String,
    pub dt_ms: f64,
    pub sample_ms: f64,
    pub robot: RobotConfig,
    pub gear: GearParams,
    pub out_dir: Option<PathBuf>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self::preset(PAPER_PRESET)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotOverrides {
    length_mm: Option<f64>,
    sprocket_diameter_mm: Option<f64>,
    input_rpm: Option<f64>,
    spring_preload_mm: Option<f64>,
    bend_extra_compression_mm: Option<f64>,
    max_compression_mm: Option<f64>,
    module_length_mm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GearOverrides {
    k: Option<f64>,
    j: Option<f64>,
    inertias: Option<[f64; 6]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    network: Value,
    mu_deg: Option<f64>,
    law: Option<String>,
    dt_ms: Option<f64>,
    sample_ms: Option<f64>,
    #[serde(default)]
    robot: RobotOverrides,
    #[serde(default)]
    gear: GearOverrides,
    out_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct ScenarioDump<'a> {
    network: Value,
    mu_deg: f64,
    law: &'a str,
    dt_ms: f64,
    sample_ms: f64,
    robot: &'a RobotConfig,
    gear: &'a GearParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    out_dir: Option<&'a PathBuf>,
}

fn parse_at<T: serde::de::DeserializeOwned>(prefix: &str, text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = match (prefix.is_empty(), path.as_str()) {
            (true, _) => path,
            (false, ".") => prefix.to_string(),
            (false, p) => format!("{prefix}.{p}"),
        };
        Error::config(field, e.into_inner().to_string())
    })
}

impl Scenario {
    pub fn preset(name: &str) -> Self {
        let robot = RobotConfig::default();
        Self {
            network: NetworkSource::Preset(name.to_string()),
            mu_deg: 0.0,
            law: DEFAULT_LAW.to_string(),
            dt_ms: DEFAULT_DT_S * 1e3,
            sample_ms: DEFAULT_SAMPLE_S * 1e3,
            robot,
            gear: GearParams::default(),
            out_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = parse_at("", text)?;
        let network = match file.network {
            Value::String(name) => NetworkSource::Preset(name),
            value @ Value::Object(_) => {
                NetworkSource::Inline(parse_at("network", &value.to_string())?)
            }
            _ => {
                return Err(Error::config(
                    "network",
                    "expected a preset name or a network descriptor object",
                ))
            }
        };

        let defaults = Scenario::default();
        let r = file.robot;
        let d = defaults.robot;
        let robot = RobotConfig {
            length_mm: r.length_mm.unwrap_or(d.length_mm),
            sprocket_diameter_mm: r.sprocket_diameter_mm.unwrap_or(d.sprocket_diameter_mm),
            input_rpm: r.input_rpm.unwrap_or(d.input_rpm),
            spring_preload_mm: r.spring_preload_mm.unwrap_or(d.spring_preload_mm),
            bend_extra_compression_mm: r
                .bend_extra_compression_mm
                .unwrap_or(d.bend_extra_compression_mm),
            max_compression_mm: r.max_compression_mm.unwrap_or(d.max_compression_mm),
            // The tilt limit uses the robot length unless a module length is given.
            module_length_mm: r
                .module_length_mm
                .or(r.length_mm)
                .unwrap_or(d.module_length_mm),
        };
        let g = file.gear;
        let gear = GearParams {
            k: g.k.unwrap_or(defaults.gear.k),
            j: g.j.unwrap_or(defaults.gear.j),
            inertias: g.inertias.unwrap_or(defaults.gear.inertias),
        };

        let scenario = Scenario {
            network,
            mu_deg: file.mu_deg.unwrap_or(defaults.mu_deg),
            law: file.law.unwrap_or(defaults.law),
            dt_ms: file.dt_ms.unwrap_or(defaults.dt_ms),
            sample_ms: file.sample_ms.unwrap_or(defaults.sample_ms),
            robot,
            gear,
            out_dir: file.out_dir,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        self.network.build()?;
        Orientation::new(self.mu_deg)?;
        if !(self.dt_ms.is_finite() && self.dt_ms > 0.0) {
            return Err(Error::config("dt_ms", "must be a positive number"));
        }
        if !(self.sample_ms.is_finite() && self.sample_ms >= self.dt_ms) {
            return Err(Error::config("sample_ms", "must be at least dt_ms"));
        }
        self.robot.validate()?;
        self.gear.validate()?;
        Ok(())
    }

    pub fn build_network(&self) -> Result<PipeNetwork> {
        self.network.build()
    }

    pub fn orientation(&self) -> Result<Orientation> {
        Orientation::new(self.mu_deg)
    }

    /// Fully resolved config; parsing it back gives an identical scenario.
    pub fn to_json(&self) -> String {
        let network = match &self.network {
            NetworkSource::Preset(name) => Value::String(name.clone()),
            NetworkSource::Inline(descriptor) => {
                serde_json::to_value(descriptor).expect("descriptor serializes to JSON")
            }
        };
        let dump = ScenarioDump {
            network,
            mu_deg: self.mu_deg,
            law: &self.law,
            dt_ms: self.dt_ms,
            sample_ms: self.sample_ms,
            robot: &self.robot,
            gear: &self.gear,
            out_dir: self.out_dir.as_ref(),
        };
        let mut text = serde_json::to_string_pretty(&dump).expect("scenario serializes to JSON");
        text.push('\n');
        text
    }
}
