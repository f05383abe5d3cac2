//! Simulation and analysis of dissipatively coupled photonic circuits.
//!
//! A circuit is a set of bosonic modes that interact only through shared
//! lossy reservoirs. Each reservoir is described by a jump operator
//! `A_j = sum_k x_jk a_k` with a relaxation rate `gamma_j`; the coherent
//! amplitudes then obey the linear drift equation `d alpha/dt = -M alpha`
//! with the Hermitian positive semidefinite matrix `M = X^H Gamma X`.
//! Light diffuses like heat while staying coherent, and the kernel of `M`
//! is the stationary (decoherence-free) subspace.
//!
//! The crate is organised around that picture:
//!
//! - [`circuit`]: the network data model and builders for the standard
//!   topologies (chain, two-arm distributor, double chain, square and
//!   honeycomb lattices).
//! - [`dynamics`]: drift matrix, time evolution, kernel projection,
//!   spectra and conserved quantities.
//! - [`stationary`]: kernel bases, compactly supported stationary states
//!   and their robustness under added loss.
//! - [`quantum`]: coherent-state mixtures, erasure energetics and a
//!   brute-force Fock-space master-equation oracle for small systems.
//! - [`waveguide`]: the physical tight-binding realization with finite
//!   reservoir waveguide arrays, and calibration of the effective model.
//! - [`io`]: the `.dpc` circuit text format, CSV/JSON tables and SVG
//!   heatmaps.

pub mod circuit;
pub mod dynamics;
pub mod io;
pub mod ode;
pub mod quantum;
pub mod stationary;
pub mod waveguide;

pub use circuit::{builders, Circuit, Diagnostic, Dissipator, Mode, Severity};
pub use dynamics::{AmplitudeVector, DriftMatrix, SpectrumResult, TimeUnit, Trajectory};

/// Complex amplitude type used throughout the crate.
pub type C64 = num_complex::Complex64;
