//! Numerical laboratory for Laguerre-expansion harmonic analysis.
//!
//! The crate evaluates the four orthonormal Laguerre function systems,
//! multiplier operators and their fractional-difference smoothness classes,
//! Poisson-semigroup square functions, twisted/Euclidean convolutions and
//! transplantation between systems, and probes the associated norm
//! inequalities with seeded, reproducible experiments.

pub mod error;
pub mod expansion;
pub mod probe;
pub mod quadrature;
pub mod report;
pub mod semigroup;
pub mod sequences;
pub mod special;
pub mod systems;

pub use error::{Error, Result};
