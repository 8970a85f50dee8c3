//! Volume-based non-Markovianity of the atomic amplitude.
//!
//! `N_V` integrates `d|C_e|^4/dt` over the intervals where `|C_e|` grows.
//! On a sampled trajectory the integral is the telescoping sum of positive
//! increments of `|C_e|^4`, which is exact for any piecewise-monotone
//! profile resolved by the grid. The normalized measure at time `t` is
//! `N(t) = N_V(t) / D(t)` where `D(t)` is the accumulated magnitude of all
//! decreases of `|C_e|^4`; with `|C_e(0)| = 1` this equals
//! `N_V(t) + 1 - |C_e(t)|^4` and tends to `N_V / (N_V + 1)` once the atom
//! has fully decayed.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{build_hamiltonian, sample_disorder, ModelConfig, ModelError};
use crate::propagate::{evolve_exact, PropagateError, TimeGrid};
use crate::stats;

/// Forward differences of `|C_e|` at or below this are treated as flat.
pub const DEFAULT_GROWTH_THRESHOLD: f64 = 1e-12;

/// Denominators below this (only at `t = 0`) give `N = 0`.
const MIN_DENOMINATOR: f64 = 1e-15;

/// `|C_e(0)|` must equal one to this tolerance.
const INITIAL_AMPLITUDE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MemoryError {
    #[error("need at least 2 samples (got {0})")]
    TooFewSamples(usize),
    #[error("times and amplitudes differ in length ({times} vs {values})")]
    LengthMismatch { times: usize, values: usize },
    #[error("sample times must be strictly increasing (t[{0}])")]
    UnorderedTimes(usize),
    #[error("|C_e(0)| must be 1 for the normalized measure (got {0})")]
    InitialAmplitude(f64),
    #[error("growth threshold must be finite and non-negative (got {0})")]
    InvalidThreshold(f64),
    #[error("sweep needs at least one disorder width and one seed")]
    EmptySweep,
    #[error("disorder width {width}, seed {seed}: {source}")]
    Model {
        width: f64,
        seed: u64,
        source: ModelError,
    },
    #[error("disorder width {width}, seed {seed}: {source}")]
    Propagation {
        width: f64,
        seed: u64,
        source: PropagateError,
    },
}

/// Which power of `|C_e|` the measure integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureExponent {
    /// `|C_e|^4`, the squared excited-state population.
    #[default]
    Fourth,
    /// `|C_e|^2`, the population itself (sensitivity studies only).
    Population,
}

impl MeasureExponent {
    fn apply(self, amplitude: f64) -> f64 {
        match self {
            Self::Fourth => amplitude.powi(4),
            Self::Population => amplitude * amplitude,
        }
    }
}

/// Closed interval `[start, end]` over which `|C_e|` increases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthWindow {
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryReport {
    pub growth_windows: Vec<GrowthWindow>,
    pub nv_cumulative: Vec<f64>,
    pub n_cumulative: Vec<f64>,
    pub nv_final: f64,
    pub n_final: f64,
    pub n_peak: f64,
}

fn check_samples(len: usize) -> Result<(), MemoryError> {
    if len < 2 {
        return Err(MemoryError::TooFewSamples(len));
    }
    Ok(())
}

/// Maximal runs of forward differences `|C_e(t_{i+1})| - |C_e(t_i)| > threshold`.
pub fn segment_growth(times: &[f64], abs_ce: &[f64], threshold: f64) -> Result<Vec<GrowthWindow>, MemoryError> {
    check_samples(abs_ce.len())?;
    if times.len() != abs_ce.len() {
        return Err(MemoryError::LengthMismatch {
            times: times.len(),
            values: abs_ce.len(),
        });
    }
    if !threshold.is_finite() || threshold < 0.0 {
        return Err(MemoryError::InvalidThreshold(threshold));
    }
    if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(MemoryError::UnorderedTimes(i + 1));
    }

    let mut windows = Vec::new();
    let mut open: Option<usize> = None;
    for i in 0..abs_ce.len() - 1 {
        let rising = abs_ce[i + 1] - abs_ce[i] > threshold;
        match (rising, open) {
            (true, None) => open = Some(i),
            (false, Some(start)) => {
                windows.push(GrowthWindow {
                    start: times[start],
                    end: times[i],
                });
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        windows.push(GrowthWindow {
            start: times[start],
            end: times[abs_ce.len() - 1],
        });
    }
    Ok(windows)
}

/// Cumulative `N_V(t_k) = sum_{i<k} max(0, f(t_{i+1}) - f(t_i))` with
/// `f = |C_e|^4` (or `|C_e|^2`).
pub fn compute_nv(abs_ce: &[f64], exponent: MeasureExponent) -> Result<Vec<f64>, MemoryError> {
    check_samples(abs_ce.len())?;
    let mut out = Vec::with_capacity(abs_ce.len());
    let mut acc = 0.0;
    out.push(acc);
    for pair in abs_ce.windows(2) {
        let rise = exponent.apply(pair[1]) - exponent.apply(pair[0]);
        if rise > 0.0 {
            acc += rise;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Cumulative normalized measure `N(t_k) = N_V(t_k) / D(t_k)`.
pub fn compute_n(abs_ce: &[f64], exponent: MeasureExponent) -> Result<Vec<f64>, MemoryError> {
    check_samples(abs_ce.len())?;
    if (abs_ce[0] - 1.0).abs() > INITIAL_AMPLITUDE_TOLERANCE {
        return Err(MemoryError::InitialAmplitude(abs_ce[0]));
    }
    let mut out = Vec::with_capacity(abs_ce.len());
    let (mut rises, mut falls) = (0.0, 0.0);
    out.push(0.0);
    for pair in abs_ce.windows(2) {
        let change = exponent.apply(pair[1]) - exponent.apply(pair[0]);
        if change > 0.0 {
            rises += change;
        } else {
            falls -= change;
        }
        out.push(if falls < MIN_DENOMINATOR { 0.0 } else { rises / falls });
    }
    Ok(out)
}

/// Growth windows plus both cumulative measures for one trajectory.
pub fn analyze(
    times: &[f64],
    abs_ce: &[f64],
    threshold: f64,
    exponent: MeasureExponent,
) -> Result<MemoryReport, MemoryError> {
    let growth_windows = segment_growth(times, abs_ce, threshold)?;
    let nv_cumulative = compute_nv(abs_ce, exponent)?;
    let n_cumulative = compute_n(abs_ce, exponent)?;
    let nv_final = *nv_cumulative.last().expect("checked length");
    let n_final = *n_cumulative.last().expect("checked length");
    let n_peak = n_cumulative.iter().copied().fold(0.0, f64::max);
    Ok(MemoryReport {
        growth_windows,
        nv_cumulative,
        n_cumulative,
        nv_final,
        n_final,
        n_peak,
    })
}

/// One disorder realization of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepMember {
    pub width: f64,
    pub seed: u64,
    pub nv_final: f64,
    pub n_final: f64,
    pub n_peak: f64,
}

/// Statistics of `n_final` across seeds at one disorder width.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub width: f64,
    pub n_mean: f64,
    /// Sample standard deviation (`n - 1` denominator; zero for one seed).
    pub n_std: f64,
    pub n_min: f64,
    pub n_max: f64,
    pub num_seeds: usize,
    /// Per-seed values in seed-list order.
    pub members: Vec<SweepMember>,
}

/// Runs one exact trajectory per `(width, seed)` and summarizes `n_final`.
///
/// Realizations run in parallel; members are reported in the order of
/// `seeds`, so output does not depend on scheduling.
pub fn disorder_sweep_n(
    cfg: &ModelConfig,
    widths: &[f64],
    seeds: &[u64],
    grid: &TimeGrid,
    exponent: MeasureExponent,
) -> Result<Vec<SweepRow>, MemoryError> {
    if widths.is_empty() || seeds.is_empty() {
        return Err(MemoryError::EmptySweep);
    }
    widths
        .iter()
        .map(|&width| {
            let members = seeds
                .par_iter()
                .map(|&seed| sweep_member(cfg, width, seed, grid, exponent))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(summarize(width, members))
        })
        .collect()
}

fn sweep_member(
    cfg: &ModelConfig,
    width: f64,
    seed: u64,
    grid: &TimeGrid,
    exponent: MeasureExponent,
) -> Result<SweepMember, MemoryError> {
    let model_err = |source| MemoryError::Model { width, seed, source };
    let disorder = sample_disorder(cfg.sites, width, seed).map_err(model_err)?;
    let h = build_hamiltonian(cfg, &disorder).map_err(model_err)?;
    let traj = evolve_exact(&h, grid, false).map_err(|source| MemoryError::Propagation { width, seed, source })?;
    let report = analyze(&traj.times, &traj.abs_ce(), DEFAULT_GROWTH_THRESHOLD, exponent)?;
    Ok(SweepMember {
        width,
        seed,
        nv_final: report.nv_final,
        n_final: report.n_final,
        n_peak: report.n_peak,
    })
}

fn summarize(width: f64, members: Vec<SweepMember>) -> SweepRow {
    let values: Vec<f64> = members.iter().map(|m| m.n_final).collect();
    let s = stats::summarize(&values);
    SweepRow {
        width,
        n_mean: s.mean,
        n_std: s.std,
        n_min: s.min,
        n_max: s.max,
        num_seeds: members.len(),
        members,
    }
}
