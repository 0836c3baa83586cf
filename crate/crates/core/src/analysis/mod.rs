//! Verification of the discrete identities and the harmonic-analysis toolkit.

pub mod checks;
pub mod green;
pub mod harmonic;
pub mod probes;

pub use checks::{build_h, residual_report, HField, ResidualReport};
