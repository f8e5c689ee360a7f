//! Finite-dimensional generalized Hofstadter matrices for magnetic
//! pseudodifferential operators, and the spectral tools used to study how
//! their spectra move with the field strength.

pub mod assembly;
pub mod error;
pub mod geometry;
pub mod quadrature;
pub mod spectral;
pub mod symbols;

pub use error::{Error, Result};
