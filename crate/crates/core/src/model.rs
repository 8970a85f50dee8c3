//! Physical configuration, on-site disorder, and the single-excitation
//! Hamiltonian of a two-point giant atom on an open tight-binding chain.
//!
//! Energies are in units of the hopping `J`, times in units of `1/J`.
//! Lattice sites are numbered `1..=L`; in the assembled matrix basis index
//! `0` is the excited atom and basis index `j` is lattice site `j`, so the
//! external 1-based site numbers carry over unchanged.

use nalgebra::DMatrix;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of the disorder generator, written into run metadata.
pub const PRNG_ALGORITHM: &str =
    "ChaCha20 (rand_chacha 0.3, seed_from_u64/PCG32 expansion); uniform = W*(2*(u64>>11)*2^-53 - 1)";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("model.sites must be at least 2 (got {0})")]
    TooFewSites(usize),
    #[error("model.{field} must be finite")]
    NonFinite { field: &'static str },
    #[error("model.hopping must be positive (got {0})")]
    NonPositiveHopping(f64),
    #[error("model.{field} must be non-negative (got {value})")]
    NegativeCoupling { field: &'static str, value: f64 },
    #[error("model.{field} = {value} is outside the lattice sites 1..={sites}")]
    SiteOutOfRange {
        field: &'static str,
        value: usize,
        sites: usize,
    },
    #[error("coupling sites must satisfy m < n (got m = {m}, n = {n})")]
    SiteOrdering { m: usize, n: usize },
    #[error("disorder must cover at least one site")]
    EmptyDisorder,
    #[error("disorder.width must be finite and non-negative (got {0})")]
    InvalidWidth(f64),
    #[error("disorder realization has {got} sites but the model has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Geometry, energies and couplings of the atom + lattice system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// Number of lattice sites `L`.
    pub sites: usize,
    /// Bare lattice mode frequency.
    pub omega0: f64,
    /// Atomic transition frequency.
    pub omega_e: f64,
    /// Nearest-neighbour hopping `J` (enters the Hamiltonian as `-J`).
    pub hopping: f64,
    pub g_m: f64,
    pub g_n: f64,
    /// First coupling site (1-based).
    pub m: usize,
    /// Second coupling site (1-based), `m < n`.
    pub n: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            sites: 200,
            omega0: 2.0,
            omega_e: 2.0,
            hopping: 1.0,
            g_m: 0.35,
            g_n: 0.35,
            m: 99,
            n: 102,
        }
    }
}

impl ModelConfig {
    pub fn with_sites(mut self, m: usize, n: usize) -> Self {
        self.m = m;
        self.n = n;
        self
    }

    /// Detuning `omega0 - omega_e`.
    pub fn detuning(&self) -> f64 {
        self.omega0 - self.omega_e
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.validate_geometry()?;
        if !self.hopping.is_finite() {
            return Err(ModelError::NonFinite { field: "hopping" });
        }
        if self.hopping <= 0.0 {
            return Err(ModelError::NonPositiveHopping(self.hopping));
        }
        Ok(())
    }

    /// Everything except the sign of the hopping, which spectral scans are
    /// allowed to sweep through zero.
    pub(crate) fn validate_geometry(&self) -> Result<(), ModelError> {
        if self.sites < 2 {
            return Err(ModelError::TooFewSites(self.sites));
        }
        for (field, value) in [("omega0", self.omega0), ("omega_e", self.omega_e)] {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { field });
            }
        }
        for (field, value) in [("g_m", self.g_m), ("g_n", self.g_n)] {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { field });
            }
            if value < 0.0 {
                return Err(ModelError::NegativeCoupling { field, value });
            }
        }
        for (field, value) in [("m", self.m), ("n", self.n)] {
            if value < 1 || value > self.sites {
                return Err(ModelError::SiteOutOfRange {
                    field,
                    value,
                    sites: self.sites,
                });
            }
        }
        if self.m >= self.n {
            return Err(ModelError::SiteOrdering {
                m: self.m,
                n: self.n,
            });
        }
        Ok(())
    }
}

/// One draw of the per-site frequency offsets `delta_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    deltas: Vec<f64>,
    width: f64,
    seed: u64,
}

impl DisorderRealization {
    /// The disorder-free lattice.
    pub fn clean(sites: usize) -> Self {
        Self {
            deltas: vec![0.0; sites],
            width: 0.0,
            seed: 0,
        }
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    /// Half-width `W` of the sampling window `[-W, W]`.
    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

/// Draws `sites` i.i.d. offsets uniform on `[-width, width]`.
///
/// The stream is ChaCha20 seeded through `seed_from_u64`; each offset uses
/// the top 53 bits of one 64-bit output, so a given `(sites, width, seed)`
/// reproduces bit-for-bit on every platform. `width == 0` yields exact zeros.
pub fn sample_disorder(sites: usize, width: f64, seed: u64) -> Result<DisorderRealization, ModelError> {
    if sites == 0 {
        return Err(ModelError::EmptyDisorder);
    }
    if !width.is_finite() || width < 0.0 {
        return Err(ModelError::InvalidWidth(width));
    }
    let deltas = if width == 0.0 {
        vec![0.0; sites]
    } else {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..sites)
            .map(|_| {
                let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                width * (2.0 * unit - 1.0)
            })
            .collect()
    };
    Ok(DisorderRealization {
        deltas,
        width,
        seed,
    })
}

/// Dense real symmetric Hamiltonian in the single-excitation basis
/// `{|e,0>, |g,1_1>, ..., |g,1_L>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    matrix: DMatrix<f64>,
}

impl HamiltonianMatrix {
    /// Wraps an arbitrary square matrix. Symmetry is not checked here; the
    /// propagators reject asymmetric input.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        assert!(matrix.is_square(), "Hamiltonian must be square");
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn sites(&self) -> usize {
        self.dim() - 1
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix[(row, col)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `max |H[a][b] - H[b][a]|`.
    pub fn asymmetry(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for a in 0..dim {
            for b in (a + 1)..dim {
                worst = worst.max((self.matrix[(a, b)] - self.matrix[(b, a)]).abs());
            }
        }
        worst
    }

    pub fn nonzero_count(&self) -> usize {
        self.matrix.iter().filter(|v| **v != 0.0).count()
    }

    /// Shifts every diagonal entry by `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut matrix = self.matrix.clone();
        for a in 0..self.dim() {
            matrix[(a, a)] += shift;
        }
        Self { matrix }
    }
}

/// Assembles `H0 + Hj + HI` for a validated configuration.
pub fn build_hamiltonian(
    cfg: &ModelConfig,
    disorder: &DisorderRealization,
) -> Result<HamiltonianMatrix, ModelError> {
    cfg.validate()?;
    assemble(cfg, disorder, cfg.hopping)
}

/// Same as [`build_hamiltonian`] with the hopping overridden; any real value
/// (including zero and negative) is accepted.
pub(crate) fn assemble(
    cfg: &ModelConfig,
    disorder: &DisorderRealization,
    hopping: f64,
) -> Result<HamiltonianMatrix, ModelError> {
    cfg.validate_geometry()?;
    if disorder.len() != cfg.sites {
        return Err(ModelError::DimensionMismatch {
            expected: cfg.sites,
            got: disorder.len(),
        });
    }
    let sites = cfg.sites;
    let mut h = DMatrix::<f64>::zeros(sites + 1, sites + 1);
    h[(0, 0)] = cfg.omega_e;
    for (j, delta) in (1..=sites).zip(disorder.deltas()) {
        h[(j, j)] = cfg.omega0 + delta;
    }
    if hopping != 0.0 {
        for j in 1..sites {
            h[(j, j + 1)] = -hopping;
            h[(j + 1, j)] = -hopping;
        }
    }
    h[(0, cfg.m)] = cfg.g_m;
    h[(cfg.m, 0)] = cfg.g_m;
    h[(0, cfg.n)] = cfg.g_n;
    h[(cfg.n, 0)] = cfg.g_n;
    Ok(HamiltonianMatrix { matrix: h })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_width_gives_zero_offsets() {
        let d = sample_disorder(200, 0.0, 7).unwrap();
        assert_eq!(d.len(), 200);
        assert!(d.deltas().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn offsets_stay_in_window_and_repeat() {
        let a = sample_disorder(200, 0.02, 7).unwrap();
        let b = sample_disorder(200, 0.02, 7).unwrap();
        assert!(a.deltas().iter().all(|x| x.abs() <= 0.02));
        assert_eq!(
            a.deltas().iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.deltas().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(a.width(), 0.02);
        assert_eq!(a.seed(), 7);
    }

    #[test]
    fn different_seeds_differ() {
        let a = sample_disorder(10, 0.5, 1).unwrap();
        let b = sample_disorder(10, 0.5, 2).unwrap();
        assert!(a.deltas().iter().zip(b.deltas()).any(|(x, y)| x != y));
    }

    #[test]
    fn rejects_empty_lattice_and_bad_width() {
        assert_eq!(sample_disorder(0, 0.1, 1), Err(ModelError::EmptyDisorder));
        assert!(matches!(
            sample_disorder(5, -0.1, 1),
            Err(ModelError::InvalidWidth(_))
        ));
        assert!(matches!(
            sample_disorder(5, f64::NAN, 1),
            Err(ModelError::InvalidWidth(_))
        ));
    }

    #[test]
    fn decoupled_atom_is_block_diagonal() {
        let cfg = ModelConfig {
            sites: 12,
            g_m: 0.0,
            g_n: 0.0,
            m: 3,
            n: 7,
            omega_e: 1.3,
            ..ModelConfig::default()
        };
        let h = build_hamiltonian(&cfg, &DisorderRealization::clean(12)).unwrap();
        assert_eq!(h.get(0, 0), 1.3);
        for j in 1..=12 {
            assert_eq!(h.get(0, j), 0.0);
            assert_eq!(h.get(j, 0), 0.0);
        }
        for j in 1..12 {
            assert_eq!(h.get(j, j + 1), -1.0);
        }
    }

    #[test]
    fn reference_configuration_entries() {
        let cfg = ModelConfig::default();
        let h = build_hamiltonian(&cfg, &DisorderRealization::clean(200)).unwrap();
        assert_eq!(h.dim(), 201);
        assert_eq!(h.get(0, 99), 0.35);
        assert_eq!(h.get(102, 0), 0.35);
        assert_eq!(h.get(50, 51), -1.0);
        assert_eq!(h.get(50, 50), 2.0);
        assert_eq!(h.get(1, 200), 0.0);
        assert_eq!(h.asymmetry(), 0.0);
        assert_eq!(h.nonzero_count(), 200 + 2 * 199 + 1 + 4);
    }

    #[test]
    fn disorder_lands_on_the_diagonal() {
        let cfg = ModelConfig::default();
        let d = sample_disorder(200, 0.3, 11).unwrap();
        let h = build_hamiltonian(&cfg, &d).unwrap();
        for j in 1..=200 {
            assert_eq!(h.get(j, j), 2.0 + d.deltas()[j - 1]);
        }
    }

    #[test]
    fn rejects_mismatched_disorder() {
        let cfg = ModelConfig::default();
        let err = build_hamiltonian(&cfg, &DisorderRealization::clean(199)).unwrap_err();
        assert_eq!(
            err,
            ModelError::DimensionMismatch {
                expected: 200,
                got: 199
            }
        );
    }

    #[test]
    fn rejects_bad_geometry() {
        let swapped = ModelConfig::default().with_sites(118, 83);
        assert_eq!(
            swapped.validate(),
            Err(ModelError::SiteOrdering { m: 118, n: 83 })
        );
        let outside = ModelConfig::default().with_sites(0, 5);
        assert!(matches!(
            outside.validate(),
            Err(ModelError::SiteOutOfRange { field: "m", .. })
        ));
        let past_end = ModelConfig::default().with_sites(5, 201);
        assert!(matches!(
            past_end.validate(),
            Err(ModelError::SiteOutOfRange { field: "n", .. })
        ));
        let negative = ModelConfig {
            g_n: -0.1,
            ..ModelConfig::default()
        };
        assert!(matches!(
            negative.validate(),
            Err(ModelError::NegativeCoupling { field: "g_n", .. })
        ));
        let flat = ModelConfig {
            hopping: 0.0,
            ..ModelConfig::default()
        };
        assert_eq!(flat.validate(), Err(ModelError::NonPositiveHopping(0.0)));
    }
}
