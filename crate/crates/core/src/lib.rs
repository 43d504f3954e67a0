//! Noisy quantum adiabatic search (QuAdS) on N-bit Exact Cover 3.
//!
//! The crate generates instances with a unique satisfying assignment, builds
//! the interpolating search Hamiltonian, samples classical square-pulse noise
//! fields coupled through a Zeeman term, integrates the Schrödinger equation,
//! and turns campaigns of required runtimes into medians and scaling fits.
//!
//! Conventions used throughout:
//!
//! * ħ = 1 and every quantity is dimensionless.
//! * Bit `z_1` of an assignment is the least-significant bit of the
//!   computational-basis index, so qubit `j` (0-based) is bit `1 << j`.
//! * Clause indices are 1-based, as in instance files; qubit indices in the
//!   Rust API are 0-based.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod ec3;
pub mod error;
pub mod fitting;
pub mod hamiltonian;
pub mod io;
pub mod noise;
pub mod protocol;
pub mod seed;
pub mod state;

pub use dynamics::{evolve, success_probability, EvolutionConfig, EvolutionOutcome};
pub use ec3::{Assignment, Clause, Ec3Instance};
pub use error::{Error, Result};
pub use fitting::{chi_square_tail, DataPoint, FitResult, ModelKind};
pub use hamiltonian::{DegreeVector, ProblemDiagonal, SearchHamiltonian};
pub use noise::{Fluctuation, NoiseEnvironment, NoiseParams, Polarization, Uniformity};
pub use protocol::{CampaignConfig, CampaignResult, MedianPoint, ProbePolicy, RuntimeRecord};
pub use state::StateVector;

/// Version string written into every provenance record.
pub const CODE_VERSION: &str = concat!("quads-core ", env!("CARGO_PKG_VERSION"));
