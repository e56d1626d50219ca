//! The flow on the collision boundary `r = 0` of a cluster decomposition `𝒞`.
//!
//! Chart coordinates are `(q^E, Q, v, X, w^E)`: the external configuration,
//! the internal direction `Q` on the unit sphere of `Δ^I_𝒞`, the radial
//! velocity `v = W(Q)^{1/2} <w^I, Q>`, the tangential part
//! `X = w^I − <w^I, Q> Q` and the external velocity. With
//! `W = U^I_𝒞(Q)`, `F^I = ℳ⁻¹∇U^I_𝒞(Q) / (2 W^{1+1/α})` and
//! `w^I = (v/√W) Q + X`:
//!
//! ```text
//! r' = 0,  (q^E)' = 0,  Q' = W^{-1/α} X,
//! v' = W^{1/2−1/α} [(1 − α/2)(‖w^I‖² − <w^I,Q>²) − (α/2)‖w^E‖²],
//! X' = F^I − <F^I,Q>Q − <F^I + W^{-1/α}Q, w^I> X − W^{-1/α} <X,w^I> Q,
//! (w^E)' = −<F^I, w^I> w^E.
//! ```

use crate::dynamics;
use crate::error::{Error, Result};
use crate::metric::{project_external, project_internal, MassSystem, Points};
use crate::partitions::Partition;
use crate::potential::{collision_sphere_potential, grad_internal_potential_mass};

/// Tolerance of the sphere and orthogonality constraints.
pub const TOL_CHART: f64 = 1e-10;
/// Tolerance of `‖w^E‖² + ‖X‖² + v²/W = 1`.
pub const TOL_CLOSURE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionChartState {
    pub part: Partition,
    pub q_ext: Points,
    pub q_int: Points,
    pub v_int: f64,
    pub x_int: Points,
    pub w_ext: Points,
}

/// The partition grouping the particles that coincide in `q` within the blocks of `part`.
fn internal_coincidences(sys: &MassSystem, part: &Partition, q: &Points) -> Partition {
    let n = sys.n();
    let mut labels: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in 0..i {
            if part.same_block(i, j) && q.row(i) == q.row(j) {
                labels[i] = labels[j];
                break;
            }
        }
    }
    Partition::from_labels(&labels)
}

fn max_abs_diff(a: &Points, b: &Points) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

impl CollisionChartState {
    /// Checks every chart invariant and names the first one violated.
    pub fn new(
        sys: &MassSystem,
        part: Partition,
        q_ext: Points,
        q_int: Points,
        v_int: f64,
        x_int: Points,
        w_ext: Points,
    ) -> Result<Self> {
        for a in [&q_ext, &q_int, &x_int, &w_ext] {
            sys.check_shape(a)?;
        }
        if part.n() != sys.n() {
            return Err(Error::Domain(format!("partition of {} elements used with {} particles", part.n(), sys.n())));
        }
        if part.is_finest() {
            return Err(Error::Domain("the finest partition has no collision boundary".into()));
        }
        let scale = |a: &Points| 1.0 + a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let centered = |a: &Points| {
            let s = sys.weighted_sum(a);
            s.dot(&s).sqrt() <= TOL_CHART * sys.total_mass() * scale(a)
        };
        if !centered(&q_ext) || max_abs_diff(&project_external(sys, &part, &q_ext)?, &q_ext) > TOL_CHART * scale(&q_ext) {
            return Err(Error::Domain("q_ext must lie in the external subspace of the partition".into()));
        }
        let bary = crate::metric::barycenters(sys, &part, &q_ext);
        for a in 0..part.rank() {
            for b in 0..a {
                if bary.row(a) == bary.row(b) {
                    return Err(Error::Domain(format!(
                        "cluster centers {} and {} coincide; the state belongs to a coarser partition",
                        b + 1,
                        a + 1
                    )));
                }
            }
        }
        if max_abs_diff(&project_internal(sys, &part, &q_int)?, &q_int) > TOL_CHART * scale(&q_int) {
            return Err(Error::Domain("Q_int must lie in the internal subspace of the partition".into()));
        }
        let j = sys.inner(&q_int, &q_int);
        if (j - 1.0).abs() > TOL_CHART {
            return Err(Error::Domain(format!("Q_int must satisfy J^I = 1, got {j}")));
        }
        let finer = internal_coincidences(sys, &part, &q_int);
        if !finer.is_finest() {
            return Err(Error::InternalCoincidence { finer: finer.meet(&part)?.to_string() });
        }
        if max_abs_diff(&project_internal(sys, &part, &x_int)?, &x_int) > TOL_CHART * scale(&x_int) {
            return Err(Error::Domain("X_int must lie in the internal subspace of the partition".into()));
        }
        let xq = sys.inner(&x_int, &q_int);
        if xq.abs() > TOL_CHART {
            return Err(Error::Domain(format!("X_int must be orthogonal to Q_int, got <X, Q> = {xq}")));
        }
        if max_abs_diff(&project_external(sys, &part, &w_ext)?, &w_ext) > TOL_CHART * scale(&w_ext)
            || !centered(&w_ext)
        {
            return Err(Error::Domain("w_ext must lie in the external subspace of the partition".into()));
        }
        let s = CollisionChartState { part, q_ext, q_int, v_int, x_int, w_ext };
        let closure = s.norm_closure(sys)?;
        if (closure - 1.0).abs() > TOL_CLOSURE {
            return Err(Error::Domain(format!("norm closure ‖w^E‖² + ‖X‖² + v²/W = {closure}, expected 1")));
        }
        Ok(s)
    }

    /// `‖w^E‖² + ‖X‖² + v²/W`.
    pub fn norm_closure(&self, sys: &MassSystem) -> Result<f64> {
        let (w, _) = collision_sphere_potential(sys, &self.part, &self.q_int)?;
        Ok(sys.inner(&self.w_ext, &self.w_ext) + sys.inner(&self.x_int, &self.x_int) + self.v_int * self.v_int / w)
    }

    /// `w^I = (v/√W) Q + X`.
    pub fn w_int(&self, sys: &MassSystem) -> Result<Points> {
        let (w, _) = collision_sphere_potential(sys, &self.part, &self.q_int)?;
        Ok(&self.q_int * (self.v_int / w.sqrt()) + &self.x_int)
    }
}

/// Time derivatives of every chart coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionFieldValue {
    pub r: f64,
    pub q_ext: Points,
    pub q_int: Points,
    pub v_int: f64,
    pub x_int: Points,
    pub w_ext: Points,
}

/// `F^I_𝒞(Q) = ℳ⁻¹∇U^I_𝒞(Q) / (2 W^{1+1/α})`, the force term in the limit `r → 0`.
pub fn internal_force(sys: &MassSystem, part: &Partition, q_int: &Points) -> Result<Points> {
    let g = grad_internal_potential_mass(sys, part, q_int)?;
    let w = crate::potential::internal_potential(sys, part, q_int)?;
    Ok(g / (2.0 * w.powf(1.0 + 1.0 / sys.alpha())))
}

pub fn collision_field(sys: &MassSystem, s: &CollisionChartState) -> Result<CollisionFieldValue> {
    let alpha = sys.alpha();
    let (w, _) = collision_sphere_potential(sys, &s.part, &s.q_int)?;
    let f = internal_force(sys, &s.part, &s.q_int)?;
    let a = w.powf(-1.0 / alpha);
    let q = &s.q_int;
    let x = &s.x_int;
    let wi = q * (s.v_int / w.sqrt()) + x;

    let wi_q = sys.inner(&wi, q);
    // ‖w^I‖² − <w^I,Q>² as the squared norm of the tangential part, free of cancellation
    let tangential = &wi - &(q * wi_q);
    let t2 = sys.inner(&tangential, &tangential);
    let we2 = sys.inner(&s.w_ext, &s.w_ext);
    let v_dot = w.powf(0.5 - 1.0 / alpha) * ((1.0 - alpha / 2.0) * t2 - alpha / 2.0 * we2);

    let f_q = sys.inner(&f, q);
    let f_wi = sys.inner(&f, &wi);
    let c_x = f_wi + a * wi_q;
    let c_q = f_q + a * sys.inner(x, &wi);
    let x_dot = &f - &(q * c_q) - &(x * c_x);

    Ok(CollisionFieldValue {
        r: 0.0,
        q_ext: sys.zeros(),
        q_int: x * a,
        v_int: v_dot,
        x_int: x_dot,
        w_ext: &s.w_ext * (-f_wi),
    })
}

/// Chart coordinates of a bulk state `(q, w)` with `r = ‖Π^I_𝒞 q‖ > 0`,
/// and the bulk field expressed in those coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BulkInChart {
    pub r: f64,
    pub state: CollisionChartState,
    pub field: CollisionFieldValue,
}

/// Pulls the rescaled bulk field at `(q, w)` back to collision-chart
/// coordinates for `part`. As `r → 0` it converges to [`collision_field`].
pub fn bulk_in_chart(sys: &MassSystem, part: &Partition, q: &Points, w: &Points, energy: f64) -> Result<BulkInChart> {
    let (q_dot, w_dot) = dynamics::rescaled_field(sys, q, w, energy)?;
    let q_ext = project_external(sys, part, q)?;
    let qi = q - &q_ext;
    let r = sys.norm(&qi);
    if r == 0.0 {
        return Err(Error::DegeneratePolar { norm: r });
    }
    let big_q = &qi / r;
    let w_ext = project_external(sys, part, w)?;
    let wi = w - &w_ext;
    let (wq, grad_w) = collision_sphere_potential(sys, part, &big_q)?;
    let s = sys.inner(&wi, &big_q);
    let v = wq.sqrt() * s;
    let x = &wi - &(&big_q * s);

    let qe_dot = project_external(sys, part, &q_dot)?;
    let qi_dot = &q_dot - &qe_dot;
    let r_dot = sys.inner(&qi_dot, &big_q);
    let big_q_dot = (&qi_dot - &(&big_q * r_dot)) / r;
    let we_dot = project_external(sys, part, &w_dot)?;
    let wi_dot = &w_dot - &we_dot;
    let s_dot = sys.inner(&wi_dot, &big_q) + sys.inner(&wi, &big_q_dot);
    let wq_dot = sys.inner(&grad_w, &big_q_dot);
    let v_dot = wq.sqrt() * s_dot + s * wq_dot / (2.0 * wq.sqrt());
    let x_dot = &wi_dot - &(&big_q * s_dot) - &(&big_q_dot * s);

    Ok(BulkInChart {
        r,
        state: CollisionChartState { part: part.clone(), q_ext, q_int: big_q, v_int: v, x_int: x, w_ext },
        field: CollisionFieldValue { r: r_dot, q_ext: qe_dot, q_int: big_q_dot, v_int: v_dot, x_int: x_dot, w_ext: we_dot },
    })
}

/// Largest componentwise difference between two field values.
pub fn field_distance(a: &CollisionFieldValue, b: &CollisionFieldValue) -> f64 {
    [
        (a.r - b.r).abs(),
        max_abs_diff(&a.q_ext, &b.q_ext),
        max_abs_diff(&a.q_int, &b.q_int),
        (a.v_int - b.v_int).abs(),
        max_abs_diff(&a.x_int, &b.x_int),
        max_abs_diff(&a.w_ext, &b.w_ext),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}
