//! Flows at spatial infinity and on the fibers over the Hill boundary.
//!
//! Near infinity write `q = r Q` with `‖Q‖_ℳ = 1` and `z = r^{-α}`. Then
//! `U(q) = z U(Q)` and, with `Ḡ/z = ((E + zU(Q))/(1 + zU(Q))) U(Q)^{-1/α}`,
//!
//! ```text
//! z' = −α Ḡ <Q, w>,   Q' = (Ḡ/z)(w − <Q, w> Q),
//! w' = F̄ − <F̄, w> w,  F̄ = z ℳ⁻¹∇U(Q) / (2 (1 + zU(Q)) U(Q)^{1/α}).
//! ```

use crate::dynamics::force_term;
use crate::error::{Error, Result};
use crate::metric::{MassSystem, Points};
use crate::partitions::Partition;
use crate::potential::{grad_internal_potential_mass, grad_potential_mass, internal_potential, potential};

pub const TOL_UNIT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct InfinityChartState {
    pub z: f64,
    pub q: Points,
    pub w: Points,
}

impl InfinityChartState {
    pub fn new(sys: &MassSystem, z: f64, q: Points, w: Points) -> Result<Self> {
        sys.check_shape(&q)?;
        sys.check_shape(&w)?;
        if !(z >= 0.0 && z.is_finite()) {
            return Err(Error::Domain(format!("z must be a nonnegative real, got {z}")));
        }
        if !sys.is_centered(&q) || !sys.is_centered(&w) {
            return Err(Error::Domain("Q and w must lie in the center-of-mass space".into()));
        }
        let nq = sys.norm(&q);
        if (nq - 1.0).abs() > TOL_UNIT {
            return Err(Error::Domain(format!("‖Q‖ must be 1, got {nq}")));
        }
        let nw = sys.norm(&w);
        if (nw - 1.0).abs() > TOL_UNIT {
            return Err(Error::Domain(format!("‖w‖ must be 1, got {nw}")));
        }
        if let Some((i, j)) = sys.coincident_pair(&q) {
            return Err(Error::CollisionSingularity { i: i + 1, j: j + 1 });
        }
        Ok(InfinityChartState { z, q, w })
    }

    /// The configuration `q = z^{-1/α} Q`; requires `z > 0`.
    pub fn position(&self, sys: &MassSystem) -> Option<Points> {
        (self.z > 0.0).then(|| &self.q * self.z.powf(-1.0 / sys.alpha()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfinityFieldValue {
    pub z: f64,
    pub q: Points,
    pub w: Points,
}

impl InfinityFieldValue {
    /// True when every component is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.z == 0.0 && self.q.iter().all(|x| *x == 0.0) && self.w.iter().all(|x| *x == 0.0)
    }
}

pub fn infinity_field(sys: &MassSystem, s: &InfinityChartState, energy: f64) -> Result<InfinityFieldValue> {
    let alpha = sys.alpha();
    let u = potential(sys, &s.q)?;
    let zu = s.z * u;
    let g_over_z = (energy + zu) / (1.0 + zu) * u.powf(-1.0 / alpha);
    let qw = sys.inner(&s.q, &s.w);
    let z_dot = -alpha * s.z * g_over_z * qw;
    let q_dot = (&s.w - &(&s.q * qw)) * g_over_z;
    let w_dot = if s.z == 0.0 {
        sys.zeros()
    } else {
        let grad = grad_potential_mass(sys, &s.q)?;
        let f = grad * (s.z / (2.0 * (1.0 + zu) * u.powf(1.0 / alpha)));
        let fw = sys.inner(&f, &s.w);
        &f - &(&s.w * fw)
    };
    Ok(InfinityFieldValue { z: z_dot, q: q_dot, w: w_dot })
}

/// The rescaled flow of the internal cluster motion when the clusters of
/// `part` have separated to infinity: only `U^I_𝒞` enters, through
/// `G̃_{E,𝒞} = (E + U^I)/((1 + U^I)(U^I)^{1/α})` and
/// `F_𝒞 = ℳ⁻¹∇U^I / (2(1 + U^I)(U^I)^{1/α})`. The cluster-center velocity is constant.
pub fn cluster_infinity_field(
    sys: &MassSystem,
    part: &Partition,
    q_int: &Points,
    w_int: &Points,
    energy: f64,
) -> Result<(Points, Points)> {
    sys.check_shape(w_int)?;
    if part.is_finest() {
        return Err(Error::Domain("the finest partition has no internal motion".into()));
    }
    let alpha = sys.alpha();
    let u = internal_potential(sys, part, q_int)?;
    let denom = (1.0 + u) * u.powf(1.0 / alpha);
    let gt = (energy + u) / denom;
    let f = grad_internal_potential_mass(sys, part, q_int)? / (2.0 * denom);
    let fw = sys.inner(&f, w_int);
    Ok((w_int * gt, &f - &(w_int * fw)))
}

/// `w' = F(q0) − <F(q0), w> w` over a Hill-boundary point `q0`, where `q` is frozen.
pub fn hill_fiber_field(sys: &MassSystem, q0: &Points, w: &Points, energy: f64, eta_hill: f64) -> Result<Points> {
    sys.check_shape(w)?;
    let u = potential(sys, q0)?;
    if (u + energy).abs() > eta_hill * (1.0 + energy.abs()) {
        return Err(Error::Domain(format!("q0 is not on the Hill boundary: E + U = {:e}", u + energy)));
    }
    let f = force_term(sys, q0)?;
    let fw = sys.inner(&f, w);
    Ok(&f - &(w * fw))
}

/// The two rest points `±∇U(q0)/‖∇U(q0)‖_ℳ` of the Hill fiber flow, attracting one first.
pub fn hill_rest_points(sys: &MassSystem, q0: &Points) -> Result<(Points, Points)> {
    let g = grad_potential_mass(sys, q0)?;
    let g = &g / sys.norm(&g);
    Ok((g.clone(), -g))
}
