//! Single-excitation spectra across one-parameter sweeps, with
//! scattering-band versus bound-state classification and an inverse
//! participation ratio for localization.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::stats;
use crate::model::{assemble, sample_disorder, DisorderRealization, ModelConfig, ModelError};

/// Band-edge tolerance used for clean (disorder-free) scans.
pub const CLEAN_BAND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("unknown sweep parameter {0:?} (expected detuning, hopping or coupling)")]
    UnknownParameter(String),
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("sweep value {0} is not finite")]
    NonFiniteValue(f64),
    #[error("ensemble needs at least one seed")]
    NoSeeds,
    #[error("sweep value {value}: {source}")]
    Model { value: f64, source: ModelError },
    #[error(transparent)]
    Disorder(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    /// `Delta = omega0 - omega_e`, varied through `omega_e` at fixed `omega0`.
    Detuning,
    /// The hopping `J` itself, any sign; band edges use `|J|`.
    Hopping,
    /// Common coupling `g_m = g_n = g`.
    Coupling,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::Detuning => "detuning",
            Self::Hopping => "hopping",
            Self::Coupling => "coupling",
        }
    }

    /// Configuration and hopping for one sweep point.
    fn apply(self, cfg: &ModelConfig, value: f64) -> (ModelConfig, f64) {
        let mut point = cfg.clone();
        let mut hopping = cfg.hopping;
        match self {
            Self::Detuning => point.omega_e = cfg.omega0 - value,
            Self::Hopping => hopping = value,
            Self::Coupling => {
                point.g_m = value;
                point.g_n = value;
            }
        }
        (point, hopping)
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = SpectrumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "detuning" | "delta" => Ok(Self::Detuning),
            "hopping" | "j" => Ok(Self::Hopping),
            "coupling" | "g" => Ok(Self::Coupling),
            _ => Err(SpectrumError::UnknownParameter(s.to_string())),
        }
    }
}

/// Inverse participation ratio of the lattice part of an eigenvector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ipr {
    Lattice(f64),
    /// The eigenvector has no weight on the lattice.
    AtomOnly,
}

impl Ipr {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Lattice(v) => Some(v),
            Self::AtomOnly => None,
        }
    }
}

/// `sum_j |v_j|^4 / (sum_j |v_j|^2)^2` over lattice components `v[1..]`.
pub fn eigenvector_ipr(eigenvector: &[f64]) -> Ipr {
    let lattice = eigenvector.get(1..).unwrap_or_default();
    let weight: f64 = lattice.iter().map(|v| v * v).sum();
    if weight <= f64::MIN_POSITIVE {
        return Ipr::AtomOnly;
    }
    let quartic: f64 = lattice.iter().map(|v| v.powi(4)).sum();
    Ipr::Lattice(quartic / (weight * weight))
}

/// Flags energies outside `[omega0 - 2|J| - tol, omega0 + 2|J| + tol]`.
pub fn classify_bound_states(eigenvalues: &[f64], omega0: f64, hopping: f64, tolerance: f64) -> Vec<bool> {
    let edge = 2.0 * hopping.abs() + tolerance;
    eigenvalues.iter().map(|e| (e - omega0).abs() > edge).collect()
}

/// `1e-9` for a clean lattice, otherwise the disorder half-width.
pub fn default_band_tolerance(width: f64) -> f64 {
    if width == 0.0 {
        CLEAN_BAND_TOLERANCE
    } else {
        width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScanOptions {
    pub want_ipr: bool,
    /// Overrides [`default_band_tolerance`].
    pub band_tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumScan {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Ascending, `L + 1` per sweep value.
    pub eigenvalues: Vec<Vec<f64>>,
    pub bound_flags: Vec<Vec<bool>>,
    pub ipr: Option<Vec<Vec<Ipr>>>,
    pub omega0: f64,
    /// Hopping in effect at each sweep value.
    pub hoppings: Vec<f64>,
    pub band_tolerance: f64,
}

impl SpectrumScan {
    /// Reclassifies every sweep point with a new band tolerance.
    pub fn reclassify(&mut self, tolerance: f64) {
        self.band_tolerance = tolerance;
        self.bound_flags = self
            .eigenvalues
            .iter()
            .zip(&self.hoppings)
            .map(|(eigs, j)| classify_bound_states(eigs, self.omega0, *j, tolerance))
            .collect();
    }

    pub fn bound_count(&self, point: usize) -> usize {
        self.bound_flags[point].iter().filter(|f| **f).count()
    }
}

fn check_values(values: &[f64]) -> Result<(), SpectrumError> {
    if values.is_empty() {
        return Err(SpectrumError::EmptyGrid);
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(SpectrumError::NonFiniteValue(*v));
    }
    Ok(())
}

/// Diagonalizes `H` at every sweep value with one fixed disorder realization.
pub fn scan_spectrum(
    cfg: &ModelConfig,
    disorder: &DisorderRealization,
    parameter: SweepParameter,
    values: &[f64],
    options: ScanOptions,
) -> Result<SpectrumScan, SpectrumError> {
    check_values(values)?;
    let points = values
        .par_iter()
        .map(|&value| {
            let (point, hopping) = parameter.apply(cfg, value);
            let h = assemble(&point, disorder, hopping).map_err(|source| SpectrumError::Model { value, source })?;
            if options.want_ipr {
                let eig = linalg::eigh(h.matrix());
                let ipr = eig
                    .vectors
                    .column_iter()
                    .map(|col| eigenvector_ipr(col.as_slice()))
                    .collect();
                Ok((eig.values, hopping, Some(ipr)))
            } else {
                Ok((linalg::eigvalsh(h.matrix()), hopping, None))
            }
        })
        .collect::<Result<Vec<_>, SpectrumError>>()?;

    let mut eigenvalues = Vec::with_capacity(points.len());
    let mut hoppings = Vec::with_capacity(points.len());
    let mut iprs = Vec::with_capacity(points.len());
    for (eigs, hopping, ipr) in points {
        eigenvalues.push(eigs);
        hoppings.push(hopping);
        if let Some(ipr) = ipr {
            iprs.push(ipr);
        }
    }
    let mut scan = SpectrumScan {
        parameter,
        values: values.to_vec(),
        eigenvalues,
        bound_flags: Vec::new(),
        ipr: options.want_ipr.then_some(iprs),
        omega0: cfg.omega0,
        hoppings,
        band_tolerance: 0.0,
    };
    scan.reclassify(
        options
            .band_tolerance
            .unwrap_or_else(|| default_band_tolerance(disorder.width())),
    );
    Ok(scan)
}

/// Spread of one sorted eigenvalue across disorder realizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenvalueSpread {
    pub value: f64,
    pub index: usize,
    pub mean: f64,
    /// Sample standard deviation (zero for a single seed).
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Re-draws the disorder for every seed, rescans, and reports per-eigenvalue
/// spreads, ordered by sweep value then eigenvalue index.
pub fn ensemble_spectrum(
    cfg: &ModelConfig,
    width: f64,
    seeds: &[u64],
    parameter: SweepParameter,
    values: &[f64],
) -> Result<Vec<EigenvalueSpread>, SpectrumError> {
    if seeds.is_empty() {
        return Err(SpectrumError::NoSeeds);
    }
    check_values(values)?;
    let scans = seeds
        .par_iter()
        .map(|&seed| {
            let disorder = sample_disorder(cfg.sites, width, seed)?;
            scan_spectrum(cfg, &disorder, parameter, values, ScanOptions::default())
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut spreads = Vec::new();
    for (point, value) in values.iter().enumerate() {
        for index in 0..scans[0].eigenvalues[point].len() {
            let samples: Vec<f64> = scans.iter().map(|s| s.eigenvalues[point][index]).collect();
            let s = stats::summarize(&samples);
            spreads.push(EigenvalueSpread {
                value: *value,
                index,
                mean: s.mean,
                std: s.std,
                min: s.min,
                max: s.max,
            });
        }
    }
    Ok(spreads)
}
