//! Reference computations for the test suites of `blowup-core`.
//!
//! Nothing here depends on the main crate. The algorithms are deliberately
//! different from the production ones: classic RK4 with step doubling
//! instead of an embedded pair, insertion-based partition enumeration with
//! bitmask blocks instead of restricted-growth strings, and the two-body
//! torus solutions obtained through the angle `ψ = w_θ − θ` and the
//! first integrals rather than the explicit `θ(τ)` formulas.

use std::fmt;

pub mod newton;
pub mod partitions;
pub mod torus;

pub use newton::{kepler_period, newton_reference, NewtonRun, PlainSystem};
pub use partitions::{exhaustive_partition_oracle, PartitionLattice};

/// One reference/implementation comparison.
/// Passes iff `|reference − implementation| ≤ tolerance · (1 + |reference|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub quantity: String,
    pub reference: f64,
    pub implementation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(quantity: impl Into<String>, reference: f64, implementation: f64, tolerance: f64) -> Self {
        let pass = (reference - implementation).abs() <= tolerance * (1.0 + reference.abs());
        OracleReport { quantity: quantity.into(), reference, implementation, tolerance, pass }
    }

    /// Panics with the report when it fails.
    pub fn assert(&self) {
        assert!(self.pass, "{self}");
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: reference {:.17e}, implementation {:.17e}, tol {:e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.quantity,
            self.reference,
            self.implementation,
            self.tolerance
        )
    }
}

/// Central differences `(f(x + h e_k) − f(x − h e_k)) / 2h`.
pub fn finite_difference_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|k| {
            y[k] = x[k] + h;
            let fp = f(&y);
            y[k] = x[k] - h;
            let fm = f(&y);
            y[k] = x[k];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeLimit(pub String);

impl fmt::Display for SizeLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "size limit exceeded: {}", self.0)
    }
}

impl std::error::Error for SizeLimit {}
