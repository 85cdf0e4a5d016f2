//! Run configuration: every detector and tracker parameter in one TOML file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{OwParams, WaParams};
use crate::centers::SearchParams;
use crate::error::{Error, Result};
use crate::track::TrackParams;
use crate::verify::VerifyParams;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Hybrid,
    Ow,
    Wa,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Hybrid, Method::Ow, Method::Wa];

    pub fn name(self) -> &'static str {
        match self {
            Method::Hybrid => "hybrid",
            Method::Ow => "ow",
            Method::Wa => "wa",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::param("method", format!("unknown method {s:?}; expected hybrid, ow or wa")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub report: Option<PathBuf>,
    /// Directory receiving one ring-diagnostics CSV per eddy.
    pub rings: Option<PathBuf>,
    pub tracks: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    /// Layer analysed by the single-layer baselines.
    pub layer: usize,
    pub search: SearchParams,
    pub verify: VerifyParams,
    pub ow: OwParams,
    pub wa: WaParams,
    pub track: TrackParams,
    pub output: OutputPaths,
}

/// Parameter names accepted by [`RunConfig::set`], as used on the command
/// line and in sweeps.
pub const PARAMETER_NAMES: &[&str] = &[
    "re",
    "rv",
    "rc",
    "rs",
    "sv",
    "sa",
    "sae",
    "san",
    "sd",
    "sy",
    "ow-k",
    "ow-window",
    "wa-step",
    "wa-spacing",
    "wa-threshold",
    "wa-tolerance",
    "wa-closure",
    "wa-merge",
    "max-displacement",
    "max-missed",
    "layer",
];

fn as_count(name: &str, value: f64) -> Result<usize> {
    if value.fract() != 0.0 || value < 0.0 || !value.is_finite() {
        return Err(Error::param(name, format!("{value} is not a non-negative integer")));
    }
    Ok(value as usize)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.search.validate()?;
        self.verify.validate()?;
        self.ow.validate()?;
        self.wa.validate()?;
        self.track.validate()
    }

    /// Overrides one named parameter. Underscores and dashes are interchangeable.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let key = name.replace('_', "-");
        match key.as_str() {
            "re" => self.search.re = as_count(name, value)?,
            "rv" => self.search.rv = as_count(name, value)?,
            "rc" => self.search.rc = as_count(name, value)?,
            "rs" => self.search.rs = as_count(name, value)?,
            "sv" => self.verify.sv = value,
            "sa" => self.verify.sa = value,
            "sae" => self.verify.sae = value,
            "san" => self.verify.san = as_count(name, value)?,
            "sd" => self.verify.sd = value,
            "sy" => self.verify.sy = value,
            "ow-k" => self.ow.k = value,
            "ow-window" => self.ow.window = as_count(name, value)?,
            "wa-step" => self.wa.step = value,
            "wa-spacing" => self.wa.seed_spacing = as_count(name, value)?,
            "wa-threshold" => self.wa.threshold = value,
            "wa-tolerance" => self.wa.tolerance = value,
            "wa-closure" => self.wa.closure_distance = value,
            "wa-merge" => self.wa.merge_distance = value,
            "max-displacement" => self.track.max_displacement = value,
            "max-missed" => self.track.max_missed_frames = as_count(name, value)?,
            "layer" => self.layer = as_count(name, value)?,
            _ => {
                return Err(Error::param(
                    name,
                    format!("unknown parameter; known: {}", PARAMETER_NAMES.join(", ")),
                ))
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::at_path(path, e))?;
    let cfg: RunConfig = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}
