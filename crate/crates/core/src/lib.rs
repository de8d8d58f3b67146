//! Exact diagonalization of the two-leg anyon-Hubbard ladder with
//! non-reciprocal hopping.
//!
//! The pipeline is: enumerate a fixed-N Fock basis ([`fock`]), assemble the
//! Hamiltonian ([`hamiltonian`]), diagonalize it with biorthonormal left and
//! right eigenvectors ([`spectral`]), then analyze it through the
//! antiunitary symmetry ([`symmetry`]), Brillouin–Wigner perturbation theory
//! ([`perturbation`]) or quench dynamics ([`dynamics`]).

pub mod error;
pub mod fock;
pub mod operators;
pub mod hamiltonian;
pub mod spectral;
pub mod symmetry;
pub mod perturbation;
pub mod dynamics;

pub use faer::c64;

pub use crate::dynamics::{QuenchConfig, QuenchResult};
pub use crate::error::{Error, Result};
pub use crate::fock::{BasisTable, Leg, OccupationState, SiteIndex};
pub use crate::hamiltonian::{HMatrix, ModelParams, TermTag};
pub use crate::spectral::{Spectrum, TrackerSample};
