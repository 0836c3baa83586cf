//! Critical FK model in its loop representation on the medial lattice, the
//! fermionic observable of the exploration interface, and the discrete
//! complex-analysis tools used to study its scaling limit.

pub mod lattice;
pub mod config;
pub mod exact;
pub mod fermion;
pub mod par;
pub mod scalar;
pub mod analysis;
pub mod sampler;
pub mod continuum;
