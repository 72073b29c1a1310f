//! Numerical verification toolkit for obstacle-type free boundary problems: exact
//! polynomial solutions on half-spaces, the Weiss energy and its monotonicity, sector
//! non-existence certificates, blowup diagnostics and corner scattering far fields.

pub mod blowup;
pub mod domain;
pub mod error;
pub mod field;
pub mod halfspace;
pub mod poly;
pub mod scatter;
pub mod quadrature;
pub mod sampled;
pub mod sector;
pub mod stats;
pub mod verify;
pub mod weiss;

pub use error::{Error, Result};
