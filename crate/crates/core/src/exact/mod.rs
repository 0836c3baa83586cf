//! Exact enumeration of all bond states of small domains.

mod cyclo;
mod enumerate;

pub use cyclo::Cyclo16;
pub use enumerate::{enumerate, ExactDistribution, ExactError, ExactObservables, Enumeration, MAX_EXACT_BITS};
