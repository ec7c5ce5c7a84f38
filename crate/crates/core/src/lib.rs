//! Compatible Poisson structures on low-dimensional Lie groups.
//!
//! The pipeline runs catalog → vielbein → bivectors → compatibility → solver →
//! bi-Hamiltonian analysis, all in exact arithmetic over [`expr::Expression`].
//! Matrix indices are zero-based; structure constants, table entries and all
//! text formats are one-based.

pub mod expr;
pub mod catalog;
pub mod vielbein;
pub mod poisson;
pub mod tables;
pub mod sampling;
pub mod solver;
pub mod biham;
pub mod report;
