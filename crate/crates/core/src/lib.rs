//! Spectral shift measures for tuples of commuting self-adjoint matrices and
//! for tuples of dissipative matrices.
//!
//! The library computes both sides of the trace formulas that define the
//! first-order (Krein-type) and second-order (Koplienko-type) spectral shift
//! measures, together with the multiple operator integrals, divided
//! differences and ideal norms they rely on.

pub mod dissipative;
pub mod cli;
pub mod divdiff;
pub mod error;
pub mod functions;
pub mod generators;
pub mod ideals;
pub mod io;
pub mod linalg;
pub mod moi;
pub mod perturb;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod ssm;
pub mod suite;

pub use error::{Error, Result};
