//! Compactified n-body dynamics.
//!
//! Particles `q_1, …, q_n ∈ R^d` with masses `m_i` interact through
//! `U(q) = Σ_{i<j} Z_ij / ‖q_i − q_j‖^α`, `0 < α < 2`. The crate provides the
//! cluster-partition lattice, the mass-metric geometry of the
//! center-of-mass space, the rescaled flow on energy surfaces, explicit
//! flows on the boundary strata added at collisions, at infinity and at the
//! Hill boundary, and the Graf covering of configuration space.

pub mod boundary;
pub mod dynamics;
pub mod error;
pub mod graf;
pub mod metric;
pub mod ode;
pub mod parallel;
pub mod partitions;
pub mod potential;
pub mod sampling;

pub use error::{Error, Result};
pub use metric::{Configuration, MassSystem, Points};
pub use partitions::Partition;
