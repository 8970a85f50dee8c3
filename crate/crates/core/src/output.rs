//! CSV artifacts and the checksummed file manifest.
//!
//! Every CSV has a header row, LF line endings and floats written with 17
//! significant digits, so bodies are byte-identical for identical inputs.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::memory::{GrowthWindow, MemoryReport, SweepRow};
use crate::propagate::{AmplitudeTrajectory, SiteGrid};
use crate::spectrum::{EigenvalueSpread, SpectrumScan};

pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const TRANSPORT_CSV: &str = "transport.csv";
pub const MEMORY_CSV: &str = "memory.csv";
pub const GROWTH_CSV: &str = "growth_windows.csv";
pub const SWEEP_CSV: &str = "sweep_n.csv";
pub const SWEEP_MEMBERS_CSV: &str = "sweep_n_members.csv";
pub const SPECTRUM_CSV: &str = "spectrum.csv";
pub const SPECTRUM_ENSEMBLE_CSV: &str = "spectrum_ensemble.csv";
pub const METADATA_JSON: &str = "metadata.json";

/// Round-trip float formatting (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn to_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

/// Collects rows in memory; [`CsvFile::finish`] writes them in one go.
pub struct CsvFile {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvFile {
    pub fn new<I, S>(header: I) -> io::Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header).map_err(to_io)?;
        Ok(Self { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> io::Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(to_io)
    }

    pub fn into_bytes(self) -> io::Result<Vec<u8>> {
        self.writer.into_inner().map_err(|e| io::Error::other(e.to_string()))
    }
}

pub fn trajectory_csv(traj: &AmplitudeTrajectory) -> io::Result<Vec<u8>> {
    let mut csv = CsvFile::new(["t", "re_ce", "im_ce", "abs_ce", "pop_e"])?;
    for (t, c) in traj.times.iter().zip(&traj.ce) {
        csv.row([fmt_f64(*t), fmt_f64(c.re), fmt_f64(c.im), fmt_f64(c.norm()), fmt_f64(c.norm_sqr())])?;
    }
    csv.into_bytes()
}

/// Header `t,1,2,...,L` (1-based site numbers), one row per sample.
pub fn transport_csv(times: &[f64], grid: &SiteGrid) -> io::Result<Vec<u8>> {
    let header = std::iter::once("t".to_string()).chain((1..=grid.sites()).map(|j| j.to_string()));
    let mut csv = CsvFile::new(header)?;
    for (k, t) in times.iter().enumerate() {
        csv.row(std::iter::once(fmt_f64(*t)).chain(grid.row(k).iter().map(|p| fmt_f64(*p))))?;
    }
    csv.into_bytes()
}

pub fn memory_csv(times: &[f64], abs_ce: &[f64], report: &MemoryReport) -> io::Result<Vec<u8>> {
    let mut csv = CsvFile::new(["t", "abs_ce", "nv", "n"])?;
    for k in 0..times.len() {
        csv.row([
            fmt_f64(times[k]),
            fmt_f64(abs_ce[k]),
            fmt_f64(report.nv_cumulative[k]),
            fmt_f64(report.n_cumulative[k]),
        ])?;
    }
    csv.into_bytes()
}

pub fn growth_csv(windows: &[GrowthWindow]) -> io::Result<Vec<u8>> {
    let mut csv = CsvFile::new(["t_start", "t_end"])?;
    for w in windows {
        csv.row([fmt_f64(w.start), fmt_f64(w.end)])?;
    }
    csv.into_bytes()
}

pub fn sweep_csv(rows: &[SweepRow]) -> io::Result<Vec<u8>> {
    let mut csv = CsvFile::new(["W", "n_mean", "n_std", "n_min", "n_max", "num_seeds"])?;
    for r in rows {
        csv.row([
            fmt_f64(r.width),
            fmt_f64(r.n_mean),
            fmt_f64(r.n_std),
            fmt_f64(r.n_min),
            fmt_f64(r.n_max),
            r.num_seeds.to_string(),
        ])?;
    }
    csv.into_bytes()
}

pub fn sweep_members_csv(rows: &[SweepRow]) -> io::Result<Vec<u8>> {
    let mut csv = CsvFile::new(["W", "seed", "nv_final", "n_final", "n_peak"])?;
    for m in rows.iter().flat_map(|r| &r.members) {
        csv.row([
            fmt_f64(m.width),
            m.seed.to_string(),
            fmt_f64(m.nv_final),
            fmt_f64(m.n_final),
            fmt_f64(m.n_peak),
        ])?;
    }
    csv.into_bytes()
}

/// Long format; `eig_index` is 0-based in ascending order, `is_bound` is
/// 0/1, `ipr` is empty when not requested and `NaN` for a state with no
/// lattice weight.
pub fn spectrum_csv(scan: &SpectrumScan) -> io::Result<Vec<u8>> {
    let mut csv = CsvFile::new(["param_value", "eig_index", "energy", "is_bound", "ipr"])?;
    for (point, value) in scan.values.iter().enumerate() {
        for (index, energy) in scan.eigenvalues[point].iter().enumerate() {
            let ipr = match &scan.ipr {
                None => String::new(),
                Some(ipr) => fmt_f64(ipr[point][index].value().unwrap_or(f64::NAN)),
            };
            csv.row([
                fmt_f64(*value),
                index.to_string(),
                fmt_f64(*energy),
                u8::from(scan.bound_flags[point][index]).to_string(),
                ipr,
            ])?;
        }
    }
    csv.into_bytes()
}

pub fn spectrum_ensemble_csv(spreads: &[EigenvalueSpread], num_seeds: usize) -> io::Result<Vec<u8>> {
    let mut csv = CsvFile::new([
        "param_value",
        "eig_index",
        "energy_mean",
        "energy_std",
        "energy_min",
        "energy_max",
        "num_seeds",
    ])?;
    for s in spreads {
        csv.row([
            fmt_f64(s.value),
            s.index.to_string(),
            fmt_f64(s.mean),
            fmt_f64(s.std),
            fmt_f64(s.min),
            fmt_f64(s.max),
            num_seeds.to_string(),
        ])?;
    }
    csv.into_bytes()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    /// File name relative to the output directory.
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Writes artifacts into one directory and records their checksums.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl ArtifactWriter {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, file: &str, contents: &[u8]) -> io::Result<()> {
        fs::write(self.dir.join(file), contents)?;
        self.entries.push(ManifestEntry {
            file: file.to_string(),
            sha256: hex::encode(Sha256::digest(contents)),
            bytes: contents.len(),
        });
        Ok(())
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<ManifestEntry> {
        self.entries
    }
}
