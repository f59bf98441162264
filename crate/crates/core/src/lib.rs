//! Exact tools for unitary designs built from finite matrix groups.

pub mod cyclo;
pub mod haar;
pub mod matrep;
pub mod symplectic;
pub mod designs;
pub mod format;
pub mod catalog;
