//! Local-time-averaged states of closed quantum systems.
//!
//! A closed system read out at an instant that is only known up to a Gaussian
//! spread is described by the mixture
//! `σ = ∫ ρ(t) |Ψ(t)⟩⟨Ψ(t)| dt`, not by the pure evolved state. This crate
//! builds `σ` (closed form and by direct quadrature), splits it into
//! object/apparatus branch operators for separable interactions, and computes
//! the diagnostics used to decide whether a bipartition behaves like an open
//! system: purity, fidelity to the pure state, branch orthogonality,
//! correlation-amplitude window averages, mutual information and the
//! pointer-basis uniqueness scan.
//!
//! Modules:
//!
//! - [`qcore`]: dense complex matrices, density matrices, partial trace,
//!   Hermitian eigensolver, entropy and fidelity.
//! - [`localtime`]: the Gaussian readout-time law, the energy-time bound and
//!   the two constructions of `σ`.
//! - [`bipartite`]: branch operators, correlation amplitudes, mutual
//!   information, classical-classical distance, uniqueness scan and the
//!   tripartite measurement state.
//! - [`models`]: the worked scenarios (qubit pairs, spin bath, position
//!   measurement, oscillator measurement, free-particle clock) and the
//!   reference-value tables.
//! - [`validation`]: randomized oracle suite comparing both constructions.
//!
//! Units: `ħ = 1` throughout.

pub mod bipartite;
pub mod error;
pub mod exec;
pub mod localtime;
pub mod models;
pub mod qcore;
pub mod validation;

pub use error::{Error, Result};
pub use exec::Exec;
pub use num_complex::Complex64 as C64;
