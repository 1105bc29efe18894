//! Decoherent continuous-time quantum walks on the d-dimensional hypercube.
//!
//! The crate covers four layers:
//!
//! - [`hypercube`] and [`density`]: vertex labels, the walk Hamiltonian and
//!   dense density matrices with their observables (hitting probability,
//!   von Neumann entropy, numerical diagnostics).
//! - [`closed_form`]: analytic hitting probabilities for the coherent walk,
//!   the subspace dephasing model and the perturbative vertex dephasing model,
//!   together with the decay-rate table and the bounds derived from it.
//! - [`dynamics`] and [`spectrum`]: Lindblad evolution of the full density
//!   matrix, the discrete measured process, and an exact check of the
//!   perturbative superoperator spectrum.
//! - [`network`]: XY qubit networks in the single-excitation sector with
//!   independent or collective dephasing.

pub mod closed_form;
pub mod density;
pub mod dynamics;
pub mod error;
pub mod hypercube;
pub mod network;
pub mod spectrum;
mod walsh;

pub use closed_form::{DecayRateTable, PerturbativeSeries, SubspaceRegime};
pub use density::{diagnose, hitting_probability, von_neumann_entropy, DensityMatrix, Diagnostics};
pub use dynamics::{
    discrete_measured_step, evolve, lindblad_rhs, IntegratorConfig, Method, ModelKind,
    ProjectorFamily, SampleOptions, Trajectory,
};
pub use error::{Result, WalkError};
pub use hypercube::{build_hamiltonian, hamming_distance, VertexIndex, WalkParams};
pub use spectrum::{verify_perturbative_spectrum, SpectralReport};
