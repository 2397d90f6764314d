//! Spectra of periodic and magnetic lattice operators via Bloch fibering.
//!
//! The crate is organized bottom-up:
//!
//! * [`model`] holds the shared domain types and the dense Hermitian
//!   eigensolver every spectral computation goes through.
//! * [`bloch`] decomposes 1D periodic operators into fibers indexed by
//!   quasi-momentum, both in a plane-wave basis (continuum) and for
//!   period-`q` chains (finite Bloch transform).
//! * [`harper`] reduces the Harper / almost-Mathieu operator at rational flux
//!   to `q x q` Bloch matrices and sweeps Hofstadter butterflies.
//! * [`cstar`] checks the algebraic side: clock and shift matrices, the
//!   canonical trace and quantization of spectral projections.
//! * [`assembly`] turns sampled fiber spectra into band sets, gaps,
//!   integrated densities of states and band-measure sequences.

// NaN must fail the range checks, hence `!(a < b)` over `a >= b`
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod bloch;
pub mod cstar;
mod error;
pub mod farey;
pub mod harper;
pub mod model;

pub use error::{Error, Result};
