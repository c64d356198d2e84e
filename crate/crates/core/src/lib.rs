//! Density-matrix toolkit for comparing quantum reduction rules.
//!
//! The crate covers:
//!
//! - dense complex matrices with a cyclic Jacobi Hermitian eigensolver
//!   ([`matrix`], [`eigen`]);
//! - density matrices that may be quasi-positive, projectors, projector
//!   families and observables ([`state`]);
//! - the standard (Lüders) reduction, the one-parameter pointer-basis family and
//!   the anticommutator reduction `ρ → ½{P, ρ} / Tr[ρP]` ([`reduction`]);
//! - an exactly solvable bit-by-bit decoherence model ([`decoherence`]);
//! - history probabilities built from nested anticommutators, with exhaustive
//!   coarse-graining consistency checks ([`histories`]).
//!
//! Everything here is pure computation over `alloc`; file formats and the
//! command-line runner live in the `qreduce` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod decoherence;
pub mod eigen;
pub mod error;
pub mod histories;
pub mod matrix;
pub mod reduction;
pub mod sampling;
pub mod state;

pub use error::{Error, Result};
pub use matrix::{c64, ComplexMatrix, C64};

/// Structural tolerance for Hermiticity, unit trace, idempotence and unitarity checks.
pub const STRUCTURAL_TOL: f64 = 1e-10;

/// Eigenvalues above `-POSITIVITY_FLOOR` count as non-negative.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

/// Default bound on the magnitude of a negative eigenvalue for a state to be
/// classified quasi-positive rather than indefinite.
pub const DEFAULT_QUASI_THRESHOLD: f64 = 1e-3;

/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Probabilities at or below this magnitude cannot be normalised by.
pub const MIN_PROBABILITY: f64 = 1e-12;

/// Imaginary part of a trace above which inputs are considered corrupted.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;
