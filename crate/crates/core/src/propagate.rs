//! Time evolution of the single-excitation amplitudes `C_e(t)`, `C_j(t)`.
//!
//! Two independent routes are provided: an exact spectral propagator
//! `C(t) = V exp(-iEt) V^T C(0)` built from one symmetric eigendecomposition,
//! and a classic fourth-order Runge-Kutta integrator on `dC/dt = -iHC` that
//! only ever touches the nonzero entries of `H`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg;
use crate::model::HamiltonianMatrix;

/// Largest asymmetry `|H[a][b] - H[b][a]|` accepted as Hermitian.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Norm drift above which an RK4 run is rejected as under-resolved.
pub const RK4_DRIFT_LIMIT: f64 = 1e-4;

/// Samples evaluated per dense block in the exact propagator.
const EXACT_BLOCK: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropagateError {
    #[error("Hamiltonian is not symmetric (max asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("time grid is empty")]
    EmptyGrid,
    #[error("time grid must start at t = 0 (got {0})")]
    GridStart(f64),
    #[error("time grid must be strictly increasing (t[{index}] = {value})")]
    GridOrder { index: usize, value: f64 },
    #[error("invalid RK4 step: dt = {dt}, t_end = {t_end}")]
    InvalidStep { dt: f64, t_end: f64 },
    #[error("sample_every must be positive")]
    ZeroSampleStride,
    #[error("RK4 norm drift {drift:e} exceeds {limit:e} at t = {time}; reduce dt")]
    StepTooLarge { drift: f64, limit: f64, time: f64 },
    #[error("initial state has {got} sites but the Hamiltonian has {expected}")]
    StateDimension { expected: usize, got: usize },
    #[error("trajectory was produced without site amplitudes")]
    SitesUnavailable,
}

/// Strictly increasing sample times starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self, PropagateError> {
        let first = *times.first().ok_or(PropagateError::EmptyGrid)?;
        if first != 0.0 {
            return Err(PropagateError::GridStart(first));
        }
        for (index, pair) in times.windows(2).enumerate() {
            if !(pair[1] > pair[0]) || !pair[1].is_finite() {
                return Err(PropagateError::GridOrder {
                    index: index + 1,
                    value: pair[1],
                });
            }
        }
        Ok(Self(times))
    }

    /// `t_k = k * dt` for `k = 0..=round(t_end / dt)`.
    pub fn uniform(dt: f64, t_end: f64) -> Result<Self, PropagateError> {
        if !(dt > 0.0) || !dt.is_finite() || !(t_end >= 0.0) || !t_end.is_finite() {
            return Err(PropagateError::InvalidStep { dt, t_end });
        }
        let steps = (t_end / dt).round() as usize;
        Self::new((0..=steps).map(|k| k as f64 * dt).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `|psi> = (sum_j C_j a_j^dag + C_e sigma^+) |0, g>`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    pub ce: Complex64,
    pub cj: Vec<Complex64>,
}

impl AmplitudeState {
    /// `C_e = 1`, lattice in vacuum.
    pub fn atom_excited(sites: usize) -> Self {
        Self {
            ce: Complex64::new(1.0, 0.0),
            cj: vec![Complex64::new(0.0, 0.0); sites],
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            ce: self.ce * factor,
            cj: self.cj.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.ce.norm_sqr() + self.cj.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    fn to_vector(&self) -> Vec<Complex64> {
        std::iter::once(self.ce).chain(self.cj.iter().copied()).collect()
    }

    fn from_vector(v: &[Complex64]) -> Self {
        Self {
            ce: v[0],
            cj: v[1..].to_vec(),
        }
    }
}

/// Site-resolved photon populations `|C_j(t)|^2`, one row per sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteGrid {
    sites: usize,
    values: Vec<f64>,
}

impl SiteGrid {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn rows(&self) -> usize {
        self.values.len() / self.sites
    }

    /// Populations of sites `1..=L` at sample `k`.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.sites..(k + 1) * self.sites]
    }

    /// Population of 1-based `site` at sample `k`.
    pub fn at(&self, k: usize, site: usize) -> f64 {
        self.values[k * self.sites + site - 1]
    }
}

#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory {
    pub times: Vec<f64>,
    pub ce: Vec<Complex64>,
    pub sites: Option<SiteGrid>,
    /// `max_k |N(0) - N(t_k)|` with `N` the total norm of the state.
    pub norm_drift: f64,
    /// Full state at the last sample.
    pub final_state: AmplitudeState,
}

impl AmplitudeTrajectory {
    pub fn abs_ce(&self) -> Vec<f64> {
        self.ce.iter().map(|c| c.norm()).collect()
    }

    pub fn population(&self) -> Vec<f64> {
        self.ce.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn check_symmetric(h: &HamiltonianMatrix) -> Result<(), PropagateError> {
    let asymmetry = h.asymmetry();
    if asymmetry > SYMMETRY_TOLERANCE {
        return Err(PropagateError::NotHermitian(asymmetry));
    }
    Ok(())
}

/// Spectral propagator: `H` is diagonalized once and every sample is an
/// independent dense evaluation, so results do not depend on the thread count.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl ExactPropagator {
    pub fn new(h: &HamiltonianMatrix) -> Result<Self, PropagateError> {
        check_symmetric(h)?;
        let linalg::Eigh { values, vectors } = linalg::eigh(h.matrix());
        Ok(Self {
            energies: values,
            vectors,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn evolve(
        &self,
        initial: &AmplitudeState,
        grid: &TimeGrid,
        want_sites: bool,
    ) -> Result<AmplitudeTrajectory, PropagateError> {
        let dim = self.energies.len();
        if initial.cj.len() + 1 != dim {
            return Err(PropagateError::StateDimension {
                expected: dim - 1,
                got: initial.cj.len(),
            });
        }
        let psi0 = initial.to_vector();
        let norm0 = initial.norm_sqr();
        // Spectral weights V^T psi0.
        let weights: Vec<Complex64> = (0..dim)
            .map(|k| {
                self.vectors
                    .column(k)
                    .iter()
                    .zip(&psi0)
                    .map(|(v, c)| c * v)
                    .sum()
            })
            .collect();

        let blocks: Vec<Block> = grid
            .times()
            .par_chunks(EXACT_BLOCK)
            .map(|times| self.evaluate_block(&weights, times, want_sites, norm0))
            .collect();

        let mut ce = Vec::with_capacity(grid.len());
        let mut site_values = Vec::new();
        let mut norm_drift = 0.0f64;
        let mut final_state = None;
        for block in blocks {
            ce.extend(block.ce);
            site_values.extend(block.sites);
            norm_drift = norm_drift.max(block.drift);
            final_state = Some(block.last);
        }
        Ok(AmplitudeTrajectory {
            times: grid.times().to_vec(),
            ce,
            sites: want_sites.then(|| SiteGrid {
                sites: dim - 1,
                values: site_values,
            }),
            norm_drift,
            final_state: final_state.expect("time grid is non-empty"),
        })
    }

    fn evaluate_block(&self, weights: &[Complex64], times: &[f64], want_sites: bool, norm0: f64) -> Block {
        let dim = self.energies.len();
        let cols = times.len();
        let mut re = DMatrix::<f64>::zeros(dim, cols);
        let mut im = DMatrix::<f64>::zeros(dim, cols);
        for (col, t) in times.iter().enumerate() {
            for (k, (energy, weight)) in self.energies.iter().zip(weights).enumerate() {
                let z = weight * Complex64::from_polar(1.0, -energy * t);
                re[(k, col)] = z.re;
                im[(k, col)] = z.im;
            }
        }
        let state_re = &self.vectors * re;
        let state_im = &self.vectors * im;

        let mut ce = Vec::with_capacity(cols);
        let mut sites = Vec::with_capacity(if want_sites { cols * (dim - 1) } else { 0 });
        let mut drift = 0.0f64;
        for col in 0..cols {
            let mut norm = 0.0;
            for a in 0..dim {
                let p = state_re[(a, col)].powi(2) + state_im[(a, col)].powi(2);
                norm += p;
                if want_sites && a > 0 {
                    sites.push(p);
                }
            }
            drift = drift.max((norm - norm0).abs());
            ce.push(Complex64::new(state_re[(0, col)], state_im[(0, col)]));
        }
        let last: Vec<Complex64> = (0..dim)
            .map(|a| Complex64::new(state_re[(a, cols - 1)], state_im[(a, cols - 1)]))
            .collect();
        Block {
            ce,
            sites,
            drift,
            last: AmplitudeState::from_vector(&last),
        }
    }
}

struct Block {
    ce: Vec<Complex64>,
    sites: Vec<f64>,
    drift: f64,
    last: AmplitudeState,
}

/// Exact evolution from the excited atom and empty lattice.
pub fn evolve_exact(
    h: &HamiltonianMatrix,
    grid: &TimeGrid,
    want_sites: bool,
) -> Result<AmplitudeTrajectory, PropagateError> {
    ExactPropagator::new(h)?.evolve(&AmplitudeState::atom_excited(h.sites()), grid, want_sites)
}

/// Nonzero entries of `H` in compressed-row form.
struct SparseRows {
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRows {
    fn from_dense(h: &HamiltonianMatrix) -> Self {
        let dim = h.dim();
        let mut row_start = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_start.push(0);
        for a in 0..dim {
            for b in 0..dim {
                let v = h.get(a, b);
                if v != 0.0 {
                    cols.push(b);
                    values.push(v);
                }
            }
            row_start.push(cols.len());
        }
        Self {
            row_start,
            cols,
            values,
        }
    }

    /// `out = -i H x`.
    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (a, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for idx in self.row_start[a]..self.row_start[a + 1] {
                acc += x[self.cols[idx]] * self.values[idx];
            }
            *slot = Complex64::new(acc.im, -acc.re);
        }
    }
}

/// Fourth-order Runge-Kutta from the excited atom and empty lattice.
pub fn evolve_rk4(
    h: &HamiltonianMatrix,
    dt: f64,
    t_end: f64,
    sample_every: usize,
    want_sites: bool,
) -> Result<AmplitudeTrajectory, PropagateError> {
    evolve_rk4_from(
        h,
        &AmplitudeState::atom_excited(h.sites()),
        dt,
        t_end,
        sample_every,
        want_sites,
    )
}

/// Fourth-order Runge-Kutta with `round(t_end / dt)` steps of size `dt`,
/// storing every `sample_every`-th step (and always `t = 0`).
pub fn evolve_rk4_from(
    h: &HamiltonianMatrix,
    initial: &AmplitudeState,
    dt: f64,
    t_end: f64,
    sample_every: usize,
    want_sites: bool,
) -> Result<AmplitudeTrajectory, PropagateError> {
    check_symmetric(h)?;
    if !(dt > 0.0) || !dt.is_finite() || !t_end.is_finite() || t_end < dt {
        return Err(PropagateError::InvalidStep { dt, t_end });
    }
    if sample_every == 0 {
        return Err(PropagateError::ZeroSampleStride);
    }
    let dim = h.dim();
    if initial.cj.len() + 1 != dim {
        return Err(PropagateError::StateDimension {
            expected: dim - 1,
            got: initial.cj.len(),
        });
    }
    let rows = SparseRows::from_dense(h);
    let steps = (t_end / dt).round() as usize;
    let norm0 = initial.norm_sqr();

    let mut state = initial.to_vector();
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; dim], vec![zero; dim], vec![zero; dim], vec![zero; dim]);
    let mut scratch = vec![zero; dim];

    let mut times = vec![0.0];
    let mut ce = vec![state[0]];
    let mut sites = Vec::new();
    if want_sites {
        sites.extend(state[1..].iter().map(|c| c.norm_sqr()));
    }
    let mut norm_drift = 0.0f64;

    for step in 1..=steps {
        rows.apply(&state, &mut k1);
        for a in 0..dim {
            scratch[a] = state[a] + k1[a] * (0.5 * dt);
        }
        rows.apply(&scratch, &mut k2);
        for a in 0..dim {
            scratch[a] = state[a] + k2[a] * (0.5 * dt);
        }
        rows.apply(&scratch, &mut k3);
        for a in 0..dim {
            scratch[a] = state[a] + k3[a] * dt;
        }
        rows.apply(&scratch, &mut k4);
        for a in 0..dim {
            state[a] += (k1[a] + (k2[a] + k3[a]) * 2.0 + k4[a]) * (dt / 6.0);
        }

        let norm: f64 = state.iter().map(|c| c.norm_sqr()).sum();
        let drift = (norm - norm0).abs();
        norm_drift = norm_drift.max(drift);
        let t = step as f64 * dt;
        if !(drift <= RK4_DRIFT_LIMIT) {
            return Err(PropagateError::StepTooLarge {
                drift,
                limit: RK4_DRIFT_LIMIT,
                time: t,
            });
        }
        if step % sample_every == 0 {
            times.push(t);
            ce.push(state[0]);
            if want_sites {
                sites.extend(state[1..].iter().map(|c| c.norm_sqr()));
            }
        }
    }

    Ok(AmplitudeTrajectory {
        times,
        ce,
        sites: want_sites.then(|| SiteGrid {
            sites: dim - 1,
            values: sites,
        }),
        norm_drift,
        final_state: AmplitudeState::from_vector(&state),
    })
}

/// Site-resolved photon populations of a trajectory.
pub fn transport_grid(traj: &AmplitudeTrajectory) -> Result<&SiteGrid, PropagateError> {
    traj.sites.as_ref().ok_or(PropagateError::SitesUnavailable)
}

/// Least-squares slope of `-ln p(t)` over samples with `t0 <= t <= t1`.
///
/// Returns `None` when fewer than two usable (positive) samples fall in the
/// window.
pub fn fit_decay_rate(times: &[f64], populations: &[f64], t0: f64, t1: f64) -> Option<f64> {
    let points: Vec<(f64, f64)> = times
        .iter()
        .zip(populations)
        .filter(|(t, p)| **t >= t0 && **t <= t1 && **p > 0.0)
        .map(|(t, p)| (*t, p.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let count = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / count;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, y) in &points {
        sxy += (t - mean_t) * (y - mean_y);
        sxx += (t - mean_t).powi(2);
    }
    (sxx > 0.0).then(|| -sxy / sxx)
}
