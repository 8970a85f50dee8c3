//! Non-Markovian dynamics of a two-level giant atom coupled at two sites to
//! a one-dimensional tight-binding lattice with on-site frequency disorder.
//!
//! The crate is organized the way a run flows:
//!
//! * [`model`]: configuration, seeded disorder, and the `(L+1)`-dimensional
//!   single-excitation Hamiltonian.
//! * [`propagate`]: exact spectral and RK4 evolution of the amplitudes.
//! * [`memory`]: growth-window segmentation and the volume non-Markovianity
//!   measures `N_V` and `N`, plus disorder ensembles.
//! * [`spectrum`]: eigenvalue sweeps, bound-state flags and IPR.
//! * [`config`], [`run`], [`output`]: the command-line front end.

pub mod config;
mod linalg;
pub mod memory;
pub mod model;
pub mod output;
pub mod presets;
pub mod propagate;
pub mod run;
pub mod spectrum;
mod stats;

pub use config::{parse_config, RunConfig};
pub use model::{build_hamiltonian, sample_disorder, DisorderRealization, HamiltonianMatrix, ModelConfig};
pub use propagate::{evolve_exact, evolve_rk4, AmplitudeTrajectory, TimeGrid};
pub use run::run;
