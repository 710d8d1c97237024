//! Metric operators for pseudo-Hermitian Hamiltonians.
//!
//! Given `H` with `H = S⁻¹H†S` for an indefinite self-adjoint `S`, the crate
//! builds a positive metric `q` under which `H` is self-adjoint, either from
//! the biorthogonal eigensystem ([`spectral`]) or from eigenvector
//! generators ([`generator`]), and checks it ([`verify`]). The Lee model
//! ([`lee`]) on a truncated Fock space ([`fock`]) provides closed forms for
//! all three routes.

pub mod cli;
pub mod error;
pub mod fock;
pub mod generator;
pub mod io;
pub mod lee;
pub mod matrix;
pub mod spectral;
pub mod verify;

pub use error::{MetricError, Result};
pub use matrix::{ComplexMatrix, C64};
