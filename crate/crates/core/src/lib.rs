//! Spectral-norm perturbation bounds for best low-rank approximations of
//! matrix inverses under additive symmetric noise.
//!
//! The crate computes closed-form error certificates, checks the gap
//! conditions under which they hold, measures the actual error, and verifies
//! the underlying contour integrals by quadrature.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod contour;
pub mod error;
pub mod harness;
pub mod ingest;
pub mod matgen;
pub mod noise;
pub mod pcg;
pub mod spectral;
mod util;

pub use error::{Error, Result};
pub use spectral::{decompose, SpectralData, SymMatrix};
