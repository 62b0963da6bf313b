//! Graded numerical laboratory for quotient modules of the Drury-Arveson
//! space: monomial Fock model, homogeneous ideals and subspace-union
//! varieties, Friedrichs-angle geometry, compressed-shift commutator
//! diagnostics, and graded similarity maps with their polar analysis.

pub mod error;
pub mod essnorm;
pub mod fock;
pub mod geometry;
pub mod linalg;
pub mod report;
pub mod serialize;
pub mod similarity;
pub mod variety;

pub use error::{CoreError, Result};
pub use linalg::Thresholds;
