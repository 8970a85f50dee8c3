//! Run configuration documents.
//!
//! A configuration is a TOML file with three tables:
//!
//! ```toml
//! [model]            # every key optional; defaults shown
//! sites = 200        # L
//! omega0 = 2.0
//! omega_e = 2.0
//! hopping = 1.0      # J
//! g_m = 0.35
//! g_n = 0.35
//! m = 99             # 1-based coupling sites, m < n
//! n = 102
//!
//! [disorder]
//! width = 0.0        # W, offsets drawn uniformly from [-W, W]
//! seed = 0           # single realization / first seed of an ensemble
//! num_seeds = 20     # ensemble seeds seed, seed+1, ...   (or:)
//! seeds = [3, 5, 8]  # explicit ensemble seeds
//!
//! [run]
//! mode = "evolve"    # evolve | transport | memory | sweep-n | spectrum
//! output_dir = "output"
//! t_end = 40.0
//! dt = 0.01          # output sample spacing
//! want_sites = false
//! propagator = "exact"   # exact | rk4
//! rk4_step = 0.001       # RK4 step, must divide dt
//! growth_threshold = 1e-12
//! measure = "fourth"     # fourth | population
//! widths = [0.0, 0.005, 0.02]          # sweep-n
//! parameter = "detuning"               # spectrum: detuning | hopping | coupling
//! sweep = { start = -4.0, stop = 4.0, points = 161 }   # or values = [...]
//! ipr = false
//! band_tolerance = 1e-9                # default: 1e-9 clean, W disordered
//! ```
//!
//! Unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::memory::MeasureExponent;
use crate::model::ModelConfig;
use crate::spectrum::SweepParameter;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid value for {field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Evolve,
    Transport,
    Memory,
    SweepN,
    Spectrum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Propagator {
    #[default]
    Exact,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderSettings {
    pub width: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_seeds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
}

impl Default for DisorderSettings {
    fn default() -> Self {
        Self {
            width: 0.0,
            seed: 0,
            num_seeds: None,
            seeds: None,
        }
    }
}

impl DisorderSettings {
    /// Explicit seed list, else `num_seeds` consecutive seeds from `seed`,
    /// else just `seed`.
    pub fn seed_list(&self) -> Vec<u64> {
        if let Some(seeds) = &self.seeds {
            return seeds.clone();
        }
        let count = self.num_seeds.unwrap_or(1) as u64;
        (0..count).map(|k| self.seed.wrapping_add(k)).collect()
    }

    /// Whether an ensemble was requested explicitly.
    pub fn is_ensemble(&self) -> bool {
        self.seeds.is_some() || self.num_seeds.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepRange {
    /// `points` evenly spaced values including both ends.
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.start],
            n => {
                let step = (self.stop - self.start) / (n - 1) as f64;
                (0..n)
                    .map(|k| if k == n - 1 { self.stop } else { self.start + k as f64 * step })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSettings {
    pub mode: Option<Mode>,
    pub output_dir: PathBuf,
    pub t_end: f64,
    pub dt: f64,
    pub want_sites: bool,
    pub propagator: Propagator,
    pub rk4_step: f64,
    pub growth_threshold: f64,
    pub measure: MeasureExponent,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub widths: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepRange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    pub ipr: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_tolerance: Option<f64>,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            mode: None,
            output_dir: PathBuf::from("output"),
            t_end: 40.0,
            dt: 0.01,
            want_sites: false,
            propagator: Propagator::Exact,
            rk4_step: 1e-3,
            growth_threshold: crate::memory::DEFAULT_GROWTH_THRESHOLD,
            measure: MeasureExponent::Fourth,
            widths: None,
            parameter: None,
            sweep: None,
            values: None,
            ipr: false,
            band_tolerance: None,
        }
    }
}

/// A parsed and validated configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub disorder: DisorderSettings,
    pub run: RunSettings,
}

impl RunConfig {
    pub fn mode(&self) -> Mode {
        self.run.mode.expect("validated configuration has a mode")
    }

    /// Spectrum sweep parameter; only meaningful in spectrum mode.
    pub fn sweep_parameter(&self) -> Option<SweepParameter> {
        self.run.parameter.as_deref().and_then(|p| p.parse().ok())
    }

    /// Spectrum sweep grid from `values` or `sweep`.
    pub fn sweep_values(&self) -> Vec<f64> {
        match (&self.run.values, &self.run.sweep) {
            (Some(values), _) => values.clone(),
            (None, Some(range)) => range.values(),
            (None, None) => Vec::new(),
        }
    }

    /// RK4 steps per output sample.
    pub fn rk4_stride(&self) -> usize {
        (self.run.dt / self.run.rk4_step).round() as usize
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model.validate().map_err(|e| {
            let field = match &e {
                crate::model::ModelError::SiteOrdering { .. } => "model.m/model.n",
                crate::model::ModelError::SiteOutOfRange { field, .. }
                | crate::model::ModelError::NonFinite { field }
                | crate::model::ModelError::NegativeCoupling { field, .. } => {
                    return invalid(&format!("model.{field}"), e.to_string())
                }
                crate::model::ModelError::TooFewSites(_) => "model.sites",
                crate::model::ModelError::NonPositiveHopping(_) => "model.hopping",
                _ => "model",
            };
            invalid(field, e.to_string())
        })?;

        let d = &self.disorder;
        if !d.width.is_finite() || d.width < 0.0 {
            return Err(invalid("disorder.width", format!("must be finite and >= 0 (got {})", d.width)));
        }
        if d.seeds.is_some() && d.num_seeds.is_some() {
            return Err(invalid("disorder.seeds", "give either seeds or num_seeds, not both"));
        }
        if d.seed_list().is_empty() {
            return Err(invalid("disorder.seeds", "seed list is empty"));
        }

        let r = &self.run;
        let mode = r.mode.ok_or_else(|| invalid("run.mode", "missing (evolve, transport, memory, sweep-n or spectrum)"))?;
        match mode {
            Mode::Evolve | Mode::Transport | Mode::Memory | Mode::SweepN => self.validate_time_grid()?,
            Mode::Spectrum => {}
        }
        match mode {
            Mode::SweepN => {
                let widths = r
                    .widths
                    .as_ref()
                    .ok_or_else(|| invalid("run.widths", "sweep-n needs a list of disorder widths"))?;
                if widths.is_empty() {
                    return Err(invalid("run.widths", "list is empty"));
                }
                if let Some(w) = widths.iter().find(|w| !w.is_finite() || **w < 0.0) {
                    return Err(invalid("run.widths", format!("widths must be finite and >= 0 (got {w})")));
                }
            }
            Mode::Spectrum => {
                let name = r
                    .parameter
                    .as_deref()
                    .ok_or_else(|| invalid("run.parameter", "spectrum mode needs detuning, hopping or coupling"))?;
                name.parse::<SweepParameter>()
                    .map_err(|e| invalid("run.parameter", e.to_string()))?;
                match (&r.values, &r.sweep) {
                    (Some(_), Some(_)) => return Err(invalid("run.values", "give either values or sweep, not both")),
                    (None, None) => return Err(invalid("run.sweep", "spectrum mode needs values or sweep")),
                    _ => {}
                }
                let values = self.sweep_values();
                if values.is_empty() {
                    return Err(invalid("run.sweep", "sweep grid is empty"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("run.sweep", "sweep values must be finite"));
                }
                if let Some(tol) = r.band_tolerance {
                    if !tol.is_finite() || tol < 0.0 {
                        return Err(invalid("run.band_tolerance", "must be finite and >= 0"));
                    }
                }
            }
            _ => {}
        }
        if !r.growth_threshold.is_finite() || r.growth_threshold < 0.0 {
            return Err(invalid("run.growth_threshold", "must be finite and >= 0"));
        }
        if r.output_dir.as_os_str().is_empty() {
            return Err(invalid("run.output_dir", "must not be empty"));
        }
        Ok(())
    }

    fn validate_time_grid(&self) -> Result<(), ConfigError> {
        let r = &self.run;
        if !(r.dt > 0.0) || !r.dt.is_finite() {
            return Err(invalid("run.dt", format!("must be positive (got {})", r.dt)));
        }
        if !(r.t_end >= r.dt) || !r.t_end.is_finite() {
            return Err(invalid("run.t_end", format!("must be at least dt (got {})", r.t_end)));
        }
        if r.propagator == Propagator::Rk4 {
            if !(r.rk4_step > 0.0) || r.rk4_step > r.dt {
                return Err(invalid("run.rk4_step", "must be positive and no larger than dt"));
            }
            let stride = r.dt / r.rk4_step;
            if (stride - stride.round()).abs() > 1e-9 * stride {
                return Err(invalid("run.rk4_step", "dt must be an integer multiple of rk4_step"));
            }
        }
        Ok(())
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}
