//! qilab: a desk-scale quantum information laboratory.
//!
//! Dense, exactly-checkable implementations of entropy inequalities and
//! entropy cones, convex-split and catalytic decoupling, port-based
//! teleportation with its converse bounds, and non-malleable quantum
//! encryption built on unitary designs. All Hilbert spaces are small enough
//! that every claim can be verified numerically against explicit matrices.

pub mod channels;
pub mod cones;
pub mod decoupling;
pub mod entropy;
pub mod metrics;
pub mod pbt;
pub mod qes;
pub mod states;
pub mod tensorlab;

/// Total-dimension guard: constructions refuse to build global operators
/// larger than this.
pub const DIM_GUARD: usize = 4096;

/// Library version string reported by tools built on qilab.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
