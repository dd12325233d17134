//! Sweep configuration: a flat `key = value` file, overridden by flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use multiphoton_core::counting::DEFAULT_N_MAX;
use multiphoton_core::propagate::{DEFAULT_DT, DEFAULT_HORIZON_FACTOR, DEFAULT_MIN_PULSE_STEPS};
use multiphoton_core::{IntegrationOptions, PulseShape, SystemKind, SystemModel};
use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_GRID: &str = "1e-3:10:24";
pub const DEFAULT_NTRAJ: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{path}:{line}: {message}")]
    Line {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{key}: {message}")]
    Value { key: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn value_error(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format `{other}`, expected csv or json")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

/// Pulse lengths in units of `1/gamma`, either log-spaced or listed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum GridSpec {
    LogSpaced { min: f64, max: f64, points: usize },
    List(Vec<f64>),
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            GridSpec::LogSpaced { min, max, points } => {
                if points == 1 {
                    return vec![min];
                }
                let (a, b) = (min.ln(), max.ln());
                (0..points)
                    .map(|i| {
                        if i == 0 {
                            min
                        } else if i == points - 1 {
                            max
                        } else {
                            (a + (b - a) * i as f64 / (points - 1) as f64).exp()
                        }
                    })
                    .collect()
            }
            GridSpec::List(ref v) => v.clone(),
        }
    }

    fn validate(&self) -> Result<(), String> {
        if let GridSpec::LogSpaced { points: 0, .. } = self {
            return Err("grid needs at least one point".into());
        }
        let v = self.values();
        if v.is_empty() {
            return Err("grid is empty".into());
        }
        if let Some(x) = v.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(format!("grid value {x} must be positive"));
        }
        if v.windows(2).any(|w| w[1] <= w[0]) {
            return Err("grid must be strictly increasing".into());
        }
        Ok(())
    }
}

impl FromStr for GridSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{}` is not a number", t.trim()))
        };
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("grid `{s}` is not min:max:points"));
            }
            let points = parts[2]
                .trim()
                .parse::<usize>()
                .map_err(|_| format!("`{}` is not a point count", parts[2].trim()))?;
            Ok(GridSpec::LogSpaced {
                min: num(parts[0])?,
                max: num(parts[1])?,
                points,
            })
        } else {
            s.split(',')
                .map(num)
                .collect::<Result<Vec<_>, _>>()
                .map(GridSpec::List)
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::LogSpaced { min, max, points } => write!(f, "{min:e}:{max:e}:{points}"),
            GridSpec::List(v) => {
                let parts: Vec<String> = v.iter().map(|x| format!("{x:e}")).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

/// Settings that may come from the file or from flags. `None` means unset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOverrides {
    pub system: Option<String>,
    pub channel: Option<String>,
    pub shape: Option<String>,
    pub area: Option<f64>,
    pub grid: Option<String>,
    pub nmax: Option<usize>,
    pub mc: Option<bool>,
    pub ntraj: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub dt: Option<f64>,
    pub min_pulse_steps: Option<usize>,
    pub horizon_factor: Option<f64>,
    pub jobs: Option<usize>,
}

impl SweepOverrides {
    /// Fields set in `other` replace those in `self`.
    pub fn merged(mut self, other: SweepOverrides) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            system,
            channel,
            shape,
            area,
            grid,
            nmax,
            mc,
            ntraj,
            seed,
            out,
            format,
            dt,
            min_pulse_steps,
            horizon_factor,
            jobs
        );
        self
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: FromStr>(v: &str) -> Result<T, String> {
            v.parse::<T>().map_err(|_| format!("cannot parse `{v}`"))
        }
        let v = value.to_string();
        match key.replace('-', "_").as_str() {
            "system" => self.system = Some(v),
            "channel" => self.channel = Some(v),
            "shape" => self.shape = Some(v),
            "area" => self.area = Some(parse(value)?),
            "grid" => self.grid = Some(v),
            "nmax" => self.nmax = Some(parse(value)?),
            "mc" => self.mc = Some(parse(value)?),
            "ntraj" => self.ntraj = Some(parse(value)?),
            "seed" => self.seed = Some(parse(value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = Some(v),
            "dt" => self.dt = Some(parse(value)?),
            "min_pulse_steps" => self.min_pulse_steps = Some(parse(value)?),
            "horizon_factor" | "horizon" => self.horizon_factor = Some(parse(value)?),
            "jobs" => self.jobs = Some(parse(value)?),
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Parse the `key = value` format. Blank lines and `#` comments are
    /// skipped; a key may appear only once.
    pub fn parse(text: &str, path: &str) -> Result<Self, ConfigError> {
        let mut out = Self::default();
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError::Line {
                path: path.to_string(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key.to_string()) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            seen.push(key.to_string());
            out.set(key, value)
                .map_err(|m| err(format!("{key}: {m}")))?;
            if key == "grid" {
                value
                    .parse::<GridSpec>()
                    .and_then(|g| g.validate())
                    .map_err(|m| err(format!("grid: {m}")))?;
            }
        }
        Ok(out)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }
}

/// Fully resolved and validated sweep settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub system: String,
    pub channel: String,
    pub shape: String,
    pub area: f64,
    pub grid: GridSpec,
    pub nmax: usize,
    pub mc: bool,
    pub ntraj: u64,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub dt: f64,
    pub min_pulse_steps: usize,
    pub horizon_factor: f64,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            system: SystemKind::TwoLevel.to_string(),
            channel: "default".into(),
            shape: PulseShape::Square.to_string(),
            area: std::f64::consts::PI,
            grid: DEFAULT_GRID.parse().expect("default grid parses"),
            nmax: DEFAULT_N_MAX,
            mc: false,
            ntraj: DEFAULT_NTRAJ,
            seed: DEFAULT_SEED,
            out: None,
            format: OutputFormat::Csv,
            dt: DEFAULT_DT,
            min_pulse_steps: DEFAULT_MIN_PULSE_STEPS,
            horizon_factor: DEFAULT_HORIZON_FACTOR,
            jobs: None,
        }
    }
}

impl SweepConfig {
    pub fn resolve(o: SweepOverrides) -> Result<Self, ConfigError> {
        let d = Self::default();
        let system: SystemKind = o
            .system
            .as_deref()
            .unwrap_or(&d.system)
            .parse()
            .map_err(|e: multiphoton_core::Error| value_error("system", e.to_string()))?;
        let shape: PulseShape = o
            .shape
            .as_deref()
            .unwrap_or(&d.shape)
            .parse()
            .map_err(|e: multiphoton_core::Error| value_error("shape", e.to_string()))?;
        let grid: GridSpec = match o.grid {
            Some(g) => g.parse().map_err(|m| value_error("grid", m))?,
            None => d.grid,
        };
        let format = match o.format {
            Some(f) => f.parse().map_err(|m| value_error("format", m))?,
            None => d.format,
        };
        let cfg = Self {
            system: system.to_string(),
            channel: o.channel.unwrap_or(d.channel),
            shape: shape.to_string(),
            area: o.area.unwrap_or(d.area),
            grid,
            nmax: o.nmax.unwrap_or(d.nmax),
            mc: o.mc.unwrap_or(d.mc),
            ntraj: o.ntraj.unwrap_or(d.ntraj),
            seed: o.seed.unwrap_or(d.seed),
            out: o.out,
            format,
            dt: o.dt.unwrap_or(d.dt),
            min_pulse_steps: o.min_pulse_steps.unwrap_or(d.min_pulse_steps),
            horizon_factor: o.horizon_factor.unwrap_or(d.horizon_factor),
            jobs: o.jobs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let model = self.model()?;
        model
            .channel_index(&self.channel)
            .map_err(|e| value_error("channel", e.to_string()))?;
        self.pulse_shape()?;
        if !(self.area > 0.0 && self.area.is_finite()) {
            return Err(value_error(
                "area",
                format!("{} must be positive", self.area),
            ));
        }
        self.grid.validate().map_err(|m| value_error("grid", m))?;
        if self.nmax < 2 {
            return Err(value_error(
                "nmax",
                format!("{} must be at least 2", self.nmax),
            ));
        }
        if self.mc && self.ntraj == 0 {
            return Err(value_error("ntraj", "at least one trajectory required"));
        }
        if self.jobs == Some(0) {
            return Err(value_error("jobs", "must be at least 1"));
        }
        self.options()
            .validate(&model)
            .map_err(|e| value_error("integration", e.to_string()))
    }

    pub fn model(&self) -> Result<SystemModel, ConfigError> {
        let kind: SystemKind = self
            .system
            .parse()
            .map_err(|e: multiphoton_core::Error| value_error("system", e.to_string()))?;
        Ok(SystemModel::unit(kind))
    }

    pub fn pulse_shape(&self) -> Result<PulseShape, ConfigError> {
        self.shape
            .parse()
            .map_err(|e: multiphoton_core::Error| value_error("shape", e.to_string()))
    }

    pub fn options(&self) -> IntegrationOptions {
        IntegrationOptions {
            dt: self.dt,
            min_pulse_steps: self.min_pulse_steps,
            horizon_factor: self.horizon_factor,
        }
    }

    /// The settings that determine the output, in the file format.
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("system", self.system.clone()),
            ("channel", self.channel.clone()),
            ("shape", self.shape.clone()),
            ("area", format!("{:e}", self.area)),
            ("grid", self.grid.to_string()),
            ("nmax", self.nmax.to_string()),
            ("mc", self.mc.to_string()),
            ("ntraj", self.ntraj.to_string()),
            ("seed", self.seed.to_string()),
            ("dt", format!("{:e}", self.dt)),
            ("min_pulse_steps", self.min_pulse_steps.to_string()),
            ("horizon_factor", format!("{:e}", self.horizon_factor)),
        ]
    }
}
