//! Executes one validated [`RunConfig`] and writes its artifacts.

use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, Mode, Propagator, RunConfig};
use crate::memory::{self, MemoryError};
use crate::model::{build_hamiltonian, sample_disorder, ModelError, PRNG_ALGORITHM};
use crate::output::{self, ArtifactWriter, ManifestEntry};
use crate::propagate::{self, AmplitudeTrajectory, PropagateError, TimeGrid};
use crate::spectrum::{self, ScanOptions, SpectrumError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl RunError {
    /// Process exit status: 2 configuration, 3 numerics, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Model(_) | Self::Propagate(_) | Self::Memory(_) | Self::Spectrum(_) => 3,
            Self::Io { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "numeric",
            _ => "io",
        }
    }

    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Scalar results worth keeping next to the artifact list.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nv_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_peak: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth_windows: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub prng: &'static str,
    pub seeds: Vec<u64>,
    pub config: RunConfig,
    pub summary: RunSummary,
    pub wall_time_seconds: f64,
    pub files: Vec<ManifestEntry>,
}

/// Files written by a run, in write order; `metadata.json` is written last
/// and is not part of its own listing.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub output_dir: PathBuf,
    pub files: Vec<ManifestEntry>,
    pub summary: RunSummary,
}

fn grid(cfg: &RunConfig) -> Result<TimeGrid, RunError> {
    Ok(TimeGrid::uniform(cfg.run.dt, cfg.run.t_end)?)
}

fn trajectory(cfg: &RunConfig, want_sites: bool) -> Result<AmplitudeTrajectory, RunError> {
    let disorder = sample_disorder(cfg.model.sites, cfg.disorder.width, cfg.disorder.seed)?;
    let h = build_hamiltonian(&cfg.model, &disorder)?;
    let traj = match cfg.run.propagator {
        Propagator::Exact => propagate::evolve_exact(&h, &grid(cfg)?, want_sites)?,
        Propagator::Rk4 => propagate::evolve_rk4(&h, cfg.run.rk4_step, cfg.run.t_end, cfg.rk4_stride(), want_sites)?,
    };
    Ok(traj)
}

/// Runs the selected mode, writing CSVs and `metadata.json` into
/// `cfg.run.output_dir`.
pub fn run(cfg: &RunConfig) -> Result<Manifest, RunError> {
    cfg.validate()?;
    let started = Instant::now();
    let dir = cfg.run.output_dir.clone();
    let mut out = ArtifactWriter::create(&dir).map_err(|e| RunError::io(&dir, e))?;
    let mut summary = RunSummary::default();

    let write = |out: &mut ArtifactWriter, name: &str, bytes: io::Result<Vec<u8>>| -> Result<(), RunError> {
        let path = dir.join(name);
        let bytes = bytes.map_err(|e| RunError::io(&path, e))?;
        out.write(name, &bytes).map_err(|e| RunError::io(&path, e))
    };

    let seeds = match cfg.mode() {
        Mode::Evolve | Mode::Transport | Mode::Memory => {
            let want_sites = cfg.mode() == Mode::Transport || cfg.run.want_sites;
            let traj = trajectory(cfg, want_sites)?;
            summary.norm_drift = Some(traj.norm_drift);
            write(&mut out, output::TRAJECTORY_CSV, output::trajectory_csv(&traj))?;
            if let Some(sites) = &traj.sites {
                write(&mut out, output::TRANSPORT_CSV, output::transport_csv(&traj.times, sites))?;
            }
            if cfg.mode() == Mode::Memory {
                let abs_ce = traj.abs_ce();
                let report = memory::analyze(&traj.times, &abs_ce, cfg.run.growth_threshold, cfg.run.measure)?;
                summary.nv_final = Some(report.nv_final);
                summary.n_final = Some(report.n_final);
                summary.n_peak = Some(report.n_peak);
                summary.growth_windows = Some(report.growth_windows.len());
                write(&mut out, output::MEMORY_CSV, output::memory_csv(&traj.times, &abs_ce, &report))?;
                write(&mut out, output::GROWTH_CSV, output::growth_csv(&report.growth_windows))?;
            }
            vec![cfg.disorder.seed]
        }
        Mode::SweepN => {
            let seeds = cfg.disorder.seed_list();
            let widths = cfg.run.widths.clone().unwrap_or_default();
            let rows = memory::disorder_sweep_n(&cfg.model, &widths, &seeds, &grid(cfg)?, cfg.run.measure)?;
            write(&mut out, output::SWEEP_CSV, output::sweep_csv(&rows))?;
            write(&mut out, output::SWEEP_MEMBERS_CSV, output::sweep_members_csv(&rows))?;
            seeds
        }
        Mode::Spectrum => {
            let parameter = cfg.sweep_parameter().expect("validated parameter");
            let values = cfg.sweep_values();
            let disorder = sample_disorder(cfg.model.sites, cfg.disorder.width, cfg.disorder.seed)?;
            let options = ScanOptions {
                want_ipr: cfg.run.ipr,
                band_tolerance: cfg.run.band_tolerance,
            };
            let scan = spectrum::scan_spectrum(&cfg.model, &disorder, parameter, &values, options)?;
            write(&mut out, output::SPECTRUM_CSV, output::spectrum_csv(&scan))?;
            if cfg.disorder.is_ensemble() {
                let seeds = cfg.disorder.seed_list();
                let spreads = spectrum::ensemble_spectrum(&cfg.model, cfg.disorder.width, &seeds, parameter, &values)?;
                write(
                    &mut out,
                    output::SPECTRUM_ENSEMBLE_CSV,
                    output::spectrum_ensemble_csv(&spreads, seeds.len()),
                )?;
                seeds
            } else {
                vec![cfg.disorder.seed]
            }
        }
    };

    let files = out.into_entries();
    let metadata = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        prng: PRNG_ALGORITHM,
        seeds,
        config: cfg.clone(),
        summary: summary.clone(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        files: files.clone(),
    };
    let meta_path = dir.join(output::METADATA_JSON);
    let json = serde_json::to_vec_pretty(&metadata).map_err(|e| RunError::io(&meta_path, e.into()))?;
    std::fs::write(&meta_path, json).map_err(|e| RunError::io(&meta_path, e))?;

    Ok(Manifest {
        output_dir: dir,
        files,
        summary,
    })
}
