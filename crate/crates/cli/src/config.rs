//! Experiment configuration: a flat `key = value` document (TOML syntax).
//!
//! | key | type | default | meaning |
//! |-----|------|---------|---------|
//! | `N` | int | required with `h` | environment size |
//! | `h` | float | required unless `couplings` | base vertical coupling |
//! | `delta_h` | float | `0` | spread: `h_j = h + (j - 1) delta_h / N` |
//! | `couplings` | float array | - | explicit `h_j`, replaces `N`/`h`/`delta_h` |
//! | `delta` | float | `0` | detuning `mu - nu` |
//! | `beta` | float | `0` | inverse temperature |
//! | `t0` | float | `0` | base time |
//! | `alpha_up_sq` | float | required | `|alpha_up|^2` |
//! | `alpha_phase` | float | `0` | phase of `alpha_down` relative to `alpha_up` |
//! | `epsilon` | float | `0.001` | classicality error |
//! | `t_start`, `t_end`, `steps` | float, float, int | `0`, `400`, `600` | half-step offset grid |
//! | `method` | string | `auto` | `exact`, `binomial`, `sampled` or `auto` |
//! | `samples` | int | `100000` | draws per grid point for `sampled` |
//! | `seed` | int | `0` | base seed |
//! | `workers` | int | `1` | worker threads |
//! | `output` | string | stdout | output path |
//! | `format` | string | `csv` | `csv` or `json` |
//! | `preset` | string | - | preset this config came from |
//! | `histogram_times` | float array | `[]` | times at which to export `P(u)` |
//!
//! `auto` resolves to `exact` for `N <= 16`, else `binomial` for uniform
//! couplings, else `sampled`.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use collapse_core::{ClassicalityError, Method, ModelParams, SystemAmplitudes, TimeGrid};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const KNOWN_KEYS: &[&str] = &[
    "N",
    "h",
    "delta_h",
    "couplings",
    "delta",
    "beta",
    "t0",
    "alpha_up_sq",
    "alpha_phase",
    "epsilon",
    "t_start",
    "t_end",
    "steps",
    "method",
    "samples",
    "seed",
    "workers",
    "output",
    "format",
    "preset",
    "histogram_times",
];

#[derive(Debug, Clone, PartialEq, Error)]
#[error("config key `{key}`: {reason}")]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

impl ConfigError {
    fn new(key: &str, reason: impl Into<String>) -> Self {
        Self {
            key: key.to_string(),
            reason: reason.into(),
        }
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
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

/// How the couplings were specified.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CouplingSpec {
    Linear { env_size: usize, h: f64, delta_h: f64 },
    Explicit { couplings: Vec<f64> },
}

impl CouplingSpec {
    pub fn env_size(&self) -> usize {
        match self {
            Self::Linear { env_size, .. } => *env_size,
            Self::Explicit { couplings } => couplings.len(),
        }
    }

    /// Compact description used in CSV output.
    pub fn describe(&self) -> String {
        match self {
            Self::Linear { h, delta_h, .. } if *delta_h == 0.0 => format!("h={h}"),
            Self::Linear { h, delta_h, .. } => format!("h={h};dh={delta_h}"),
            Self::Explicit { couplings } => {
                let items: Vec<String> = couplings.iter().map(|h| h.to_string()).collect();
                format!("list:{}", items.join("|"))
            }
        }
    }
}

/// A validated experiment with every default resolved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub couplings: CouplingSpec,
    pub delta: f64,
    pub beta: f64,
    pub t0: f64,
    pub alpha_up_sq: f64,
    pub alpha_phase: f64,
    pub epsilon: f64,
    pub grid: TimeGrid,
    pub method: Method,
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub preset: Option<String>,
    pub histogram_times: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct RawConfig {
    #[serde(rename = "N")]
    n: Option<i64>,
    h: Option<f64>,
    delta_h: Option<f64>,
    couplings: Option<Vec<f64>>,
    delta: Option<f64>,
    beta: Option<f64>,
    t0: Option<f64>,
    alpha_up_sq: Option<f64>,
    alpha_phase: Option<f64>,
    epsilon: Option<f64>,
    t_start: Option<f64>,
    t_end: Option<f64>,
    steps: Option<i64>,
    method: Option<String>,
    samples: Option<i64>,
    seed: Option<i64>,
    workers: Option<i64>,
    output: Option<String>,
    format: Option<String>,
    preset: Option<String>,
    histogram_times: Option<Vec<f64>>,
}

fn finite(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(key, "must be finite"))
    }
}

fn count(key: &str, v: i64, min: i64) -> Result<usize, ConfigError> {
    if v < min {
        return Err(ConfigError::new(key, format!("must be at least {min}, got {v}")));
    }
    Ok(v as usize)
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::new("<document>", e.message().to_string()))?;
    if let Some(unknown) = table.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(ConfigError::new(unknown, "unknown key"));
    }
    let raw: RawConfig = table.try_into().map_err(|e: toml::de::Error| {
        ConfigError::new("<document>", e.message().trim().to_string())
    })?;
    from_raw(raw)
}

fn from_raw(raw: RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let couplings = match (raw.couplings, raw.n, raw.h) {
        (Some(list), n, None) if raw.delta_h.is_none() => {
            if list.is_empty() {
                return Err(ConfigError::new("couplings", "needs at least one value"));
            }
            if let Some(n) = n {
                if n as usize != list.len() || n < 1 {
                    return Err(ConfigError::new(
                        "N",
                        format!("is {n} but `couplings` has {} entries", list.len()),
                    ));
                }
            }
            for &h in &list {
                finite("couplings", h)?;
            }
            CouplingSpec::Explicit { couplings: list }
        }
        (Some(_), _, _) => {
            return Err(ConfigError::new("couplings", "cannot be combined with `h` or `delta_h`"))
        }
        (None, Some(n), Some(h)) => CouplingSpec::Linear {
            env_size: count("N", n, 1)?,
            h: finite("h", h)?,
            delta_h: finite("delta_h", raw.delta_h.unwrap_or(0.0))?,
        },
        (None, None, _) => return Err(ConfigError::new("N", "is required")),
        (None, Some(_), None) => return Err(ConfigError::new("h", "is required")),
    };

    let alpha_up_sq = raw
        .alpha_up_sq
        .ok_or_else(|| ConfigError::new("alpha_up_sq", "is required"))?;
    if !(0.0..=1.0).contains(&alpha_up_sq) {
        return Err(ConfigError::new("alpha_up_sq", format!("must lie in [0, 1], got {alpha_up_sq}")));
    }
    let epsilon = raw.epsilon.unwrap_or(collapse_core::observables::DEFAULT_EPSILON);
    ClassicalityError::new(epsilon).map_err(|e| ConfigError::new("epsilon", e.to_string()))?;
    let beta = finite("beta", raw.beta.unwrap_or(0.0))?;
    if beta < 0.0 {
        return Err(ConfigError::new("beta", "must be non-negative"));
    }
    let t0 = finite("t0", raw.t0.unwrap_or(0.0))?;
    let t_start = finite("t_start", raw.t_start.unwrap_or(0.0))?;
    if t_start < t0 {
        return Err(ConfigError::new("t_start", format!("must not precede t0 = {t0}")));
    }
    let t_end = finite("t_end", raw.t_end.unwrap_or(400.0))?;
    let steps = count("steps", raw.steps.unwrap_or(600), 1)?;
    let grid = TimeGrid::new(t_start, t_end, steps).map_err(|e| ConfigError::new("t_end", e.to_string()))?;
    let histogram_times = raw.histogram_times.unwrap_or_default();
    for &t in &histogram_times {
        if !t.is_finite() || t < t0 {
            return Err(ConfigError::new("histogram_times", format!("{t} is not a valid time")));
        }
    }

    let mut config = ExperimentConfig {
        couplings,
        delta: finite("delta", raw.delta.unwrap_or(0.0))?,
        beta,
        t0,
        alpha_up_sq,
        alpha_phase: finite("alpha_phase", raw.alpha_phase.unwrap_or(0.0))?,
        epsilon,
        grid,
        method: Method::Exact,
        samples: count("samples", raw.samples.unwrap_or(100_000), 1)?,
        seed: match raw.seed {
            Some(s) if s < 0 => return Err(ConfigError::new("seed", "must be non-negative")),
            Some(s) => s as u64,
            None => 0,
        },
        workers: count("workers", raw.workers.unwrap_or(1), 1)?,
        output: raw.output.map(PathBuf::from),
        format: raw
            .format
            .as_deref()
            .unwrap_or("csv")
            .parse()
            .map_err(|e| ConfigError::new("format", e))?,
        preset: raw.preset,
        histogram_times,
    };
    let params = config.params().map_err(|e| ConfigError::new("couplings", e.to_string()))?;
    config.method = match raw.method.as_deref().unwrap_or("auto") {
        "auto" => Method::auto(&params),
        other => other.parse().map_err(|e: collapse_core::Error| ConfigError::new("method", e.to_string()))?,
    };
    if config.method == Method::Binomial && params.uniform_coupling().is_err() {
        return Err(ConfigError::new("method", "binomial requires uniform couplings"));
    }
    if config.method == Method::Exact && params.env_size() > collapse_core::engine::ENUMERATION_CAP {
        return Err(ConfigError::new(
            "method",
            format!("exact enumeration is capped at N = {}", collapse_core::engine::ENUMERATION_CAP),
        ));
    }
    Ok(config)
}

impl ExperimentConfig {
    pub fn env_size(&self) -> usize {
        self.couplings.env_size()
    }

    pub fn params(&self) -> collapse_core::Result<ModelParams> {
        let base = match &self.couplings {
            CouplingSpec::Linear {
                env_size,
                h,
                delta_h,
            } => ModelParams::dispersed(*env_size, *h, *delta_h, self.delta)?,
            CouplingSpec::Explicit { couplings } => ModelParams::new(self.delta, couplings.clone())?,
        };
        base.with_inv_temperature(self.beta)?.with_base_time(self.t0)
    }

    pub fn alphas(&self) -> collapse_core::Result<SystemAmplitudes> {
        SystemAmplitudes::from_population(self.alpha_up_sq, self.alpha_phase)
    }

    pub fn epsilon(&self) -> ClassicalityError {
        ClassicalityError::new(self.epsilon).expect("validated at parse time")
    }

    /// Serializes every key, defaults included, so that `parse_config`
    /// reproduces this value exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let float_list = |xs: &[f64]| {
            let items: Vec<String> = xs.iter().map(|x| format!("{x:?}")).collect();
            format!("[{}]", items.join(", "))
        };
        match &self.couplings {
            CouplingSpec::Linear {
                env_size,
                h,
                delta_h,
            } => {
                kv("N", env_size.to_string());
                kv("h", format!("{h:?}"));
                kv("delta_h", format!("{delta_h:?}"));
            }
            CouplingSpec::Explicit { couplings } => kv("couplings", float_list(couplings)),
        }
        kv("delta", format!("{:?}", self.delta));
        kv("beta", format!("{:?}", self.beta));
        kv("t0", format!("{:?}", self.t0));
        kv("alpha_up_sq", format!("{:?}", self.alpha_up_sq));
        kv("alpha_phase", format!("{:?}", self.alpha_phase));
        kv("epsilon", format!("{:?}", self.epsilon));
        kv("t_start", format!("{:?}", self.grid.start));
        kv("t_end", format!("{:?}", self.grid.end));
        kv("steps", self.grid.steps.to_string());
        kv("method", format!("{:?}", self.method.as_str()));
        kv("samples", self.samples.to_string());
        kv("seed", self.seed.to_string());
        kv("workers", self.workers.to_string());
        if let Some(out) = &self.output {
            kv("output", format!("{:?}", out.to_string_lossy()));
        }
        kv("format", format!("{:?}", self.format.as_str()));
        if let Some(p) = &self.preset {
            kv("preset", format!("{p:?}"));
        }
        if !self.histogram_times.is_empty() {
            kv("histogram_times", float_list(&self.histogram_times));
        }
        s
    }
}
