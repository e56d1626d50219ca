//! The bulk flow in physical and rescaled variables.
//!
//! With `G_E = (2(E+U))^{-1/2}` the rescaled velocity `w = G_E v` has unit
//! mass norm on the energy surface. The time `τ` with
//! `dt/dτ = G̃_E G_E`, `G̃_E = (E+U)/(1+U) · U^{-1/α}`, turns Newton's
//! equations into
//!
//! ```text
//! q' = G̃_E(q) w,    w' = F(q) − <F(q), w> w,    F = ℳ⁻¹∇U / (2(1+U)U^{1/α}).
//! ```

use crate::error::{Error, Result};
use crate::metric::{Configuration, MassSystem, Points};
use crate::ode::{Flow, Solver, Stats};
use crate::potential::{grad_potential_mass, potential};

/// Tolerance on `‖w‖_ℳ = 1`.
pub const TOL_UNIT: f64 = 1e-9;
/// Tolerance on `H = E` when converting physical states.
pub const TOL_ENERGY: f64 = 1e-9;

/// `(q, v)` with `v` the velocity array.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalState {
    pub q: Configuration,
    pub v: Points,
}

impl PhysicalState {
    /// Rejects collisions; re-centers `q` and removes any center-of-mass velocity.
    pub fn new(sys: &MassSystem, q: Points, v: Points) -> Result<Self> {
        let q = Configuration::off_collisions(sys, q)?;
        sys.check_shape(&v)?;
        let v = if sys.is_centered(&v) {
            v
        } else {
            log::warn!("velocity has a center-of-mass component; removing it");
            sys.center(&v)
        };
        Ok(PhysicalState { q, v })
    }

    pub fn kinetic(&self, sys: &MassSystem) -> f64 {
        0.5 * sys.inner(&self.v, &self.v)
    }

    /// `H = K − U`.
    pub fn energy(&self, sys: &MassSystem) -> Result<f64> {
        Ok(self.kinetic(sys) - potential(sys, &self.q)?)
    }
}

/// `(q, w)` on the energy surface `E`, `‖w‖_ℳ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledState {
    pub q: Configuration,
    pub w: Points,
    pub energy: f64,
}

impl RescaledState {
    /// Validates the state. `w` is projected onto `M` and must have unit
    /// mass norm within [`TOL_UNIT`]; it is then normalized exactly.
    pub fn new(sys: &MassSystem, q: Points, w: Points, energy: f64) -> Result<Self> {
        let q = Configuration::off_collisions(sys, q)?;
        sys.check_shape(&w)?;
        if !energy.is_finite() {
            return Err(Error::Domain("energy must be finite".into()));
        }
        let w = sys.center(&w);
        let norm = sys.norm(&w);
        if (norm - 1.0).abs() > TOL_UNIT {
            return Err(Error::Consistency(format!("rescaled velocity has mass norm {norm}, expected 1")));
        }
        let u = potential(sys, &q)?;
        if energy + u < -1e-10 * (1.0 + u) {
            return Err(Error::OutsideHillInterior { margin: energy + u });
        }
        Ok(RescaledState { q, w: w / norm, energy })
    }

    /// Like [`RescaledState::new`] but rescales any nonzero `w` to unit norm.
    pub fn normalized(sys: &MassSystem, q: Points, w: Points, energy: f64) -> Result<Self> {
        sys.check_shape(&w)?;
        let w = sys.center(&w);
        let norm = sys.norm(&w);
        if norm == 0.0 {
            return Err(Error::Domain("rescaled velocity must be nonzero".into()));
        }
        Self::new(sys, q, w / norm, energy)
    }
}

/// `G_E(q) = (2(E + U))^{-1/2}`.
pub fn speed_scale(sys: &MassSystem, q: &Points, energy: f64) -> Result<f64> {
    let u = potential(sys, q)?;
    let m = energy + u;
    if m <= 0.0 {
        return Err(Error::OutsideHillInterior { margin: m });
    }
    Ok((2.0 * m).powf(-0.5))
}

fn time_scale_from(u: f64, energy: f64, alpha: f64) -> f64 {
    (energy + u) / (1.0 + u) * u.powf(-1.0 / alpha)
}

/// `G̃_E(q) = (E+U)/(1+U) · U^{-1/α}`; zero on the Hill boundary.
pub fn time_scale(sys: &MassSystem, q: &Points, energy: f64) -> Result<f64> {
    let u = potential(sys, q)?;
    if energy + u < 0.0 {
        return Err(Error::OutsideHillInterior { margin: energy + u });
    }
    Ok(time_scale_from(u, energy, sys.alpha()))
}

fn force_from(sys: &MassSystem, q: &Points, u: f64) -> Result<Points> {
    let g = grad_potential_mass(sys, q)?;
    Ok(g / (2.0 * (1.0 + u) * u.powf(1.0 / sys.alpha())))
}

/// `F(q) = ℳ⁻¹∇U / (2(1+U)U^{1/α})`, bounded near the collision set.
pub fn force_term(sys: &MassSystem, q: &Points) -> Result<Points> {
    let u = potential(sys, q)?;
    force_from(sys, q, u)
}

/// `(q', w')` of the rescaled flow at `(q, w)` on the energy surface `energy`.
pub fn rescaled_field(sys: &MassSystem, q: &Points, w: &Points, energy: f64) -> Result<(Points, Points)> {
    sys.check_shape(w)?;
    let u = potential(sys, q)?;
    let gt = time_scale_from(u, energy, sys.alpha());
    let f = force_from(sys, q, u)?;
    let fw = sys.inner(&f, w);
    let w_dot = &f - &(w * fw);
    Ok((w * gt, w_dot))
}

/// `dt/dτ = G̃_E G_E = sqrt(E+U) / (√2 (1+U) U^{1/α})`, clamped to `0` outside the Hill region.
pub fn time_rate(sys: &MassSystem, q: &Points, energy: f64) -> Result<f64> {
    let u = potential(sys, q)?;
    Ok(rate_from(u, energy, sys.alpha()))
}

fn rate_from(u: f64, energy: f64, alpha: f64) -> f64 {
    (energy + u).max(0.0).sqrt() / (std::f64::consts::SQRT_2 * (1.0 + u) * u.powf(1.0 / alpha))
}

/// Newton's equations `q̇ = v`, `v̇ = ℳ⁻¹∇U`.
pub fn physical_field(sys: &MassSystem, q: &Points, v: &Points) -> Result<(Points, Points)> {
    sys.check_shape(v)?;
    Ok((v.clone(), grad_potential_mass(sys, q)?))
}

/// `w = G_E v` with `E` required to match `H(q, v)`.
pub fn to_rescaled(sys: &MassSystem, phys: &PhysicalState, energy: f64) -> Result<RescaledState> {
    let h = phys.energy(sys)?;
    if (h - energy).abs() > TOL_ENERGY * (1.0 + energy.abs()) {
        return Err(Error::Consistency(format!("state has energy {h}, expected {energy}")));
    }
    let g = speed_scale(sys, &phys.q, energy)?;
    let w = &phys.v * g;
    let norm = sys.norm(&w);
    if norm == 0.0 {
        return Err(Error::OutsideHillInterior { margin: 0.0 });
    }
    Ok(RescaledState { q: phys.q.clone(), w: w / norm, energy })
}

/// `v = w / G_E`; requires the strict Hill interior.
pub fn from_rescaled(sys: &MassSystem, res: &RescaledState) -> Result<PhysicalState> {
    let g = speed_scale(sys, &res.q, res.energy)?;
    Ok(PhysicalState { q: res.q.clone(), v: &res.w / g })
}

/// Integration tolerances and event thresholds. Thresholds left as `None`
/// default to scale-relative values taken from the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Controls {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Largest allowed `|Δτ|`.
    pub max_step: f64,
    /// Collision event at `ρ < rho_switch`; default `1e-6 ρ(q0)`.
    pub rho_switch: Option<f64>,
    /// Escape event at `‖q‖_ℳ > r_max`; default `1e6 ‖q0‖_ℳ`.
    pub r_max: Option<f64>,
    /// Hill event at `E + U < eta_hill`.
    pub eta_hill: f64,
    /// Keep every `record_every`-th accepted step (the last step is always kept).
    pub record_every: usize,
}

impl Default for Controls {
    fn default() -> Self {
        Controls {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 2_000_000,
            max_step: f64::INFINITY,
            rho_switch: None,
            r_max: None,
            eta_hill: 1e-10,
            record_every: 1,
        }
    }
}

/// Why an integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    SpanEnd,
    CollisionEvent,
    EscapeEvent,
    HillEvent,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::SpanEnd => "span",
            Termination::CollisionEvent => "collision-event",
            Termination::EscapeEvent => "escape-event",
            Termination::HillEvent => "hill-event",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub tau: f64,
    pub t: f64,
    pub q: Points,
    pub w: Points,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub energy: f64,
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub stats: Stats,
    /// Largest `|‖w‖_ℳ − 1|` seen before renormalization.
    pub max_norm_drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

fn unflatten(sys: &MassSystem, y: &[f64]) -> (Points, Points) {
    let nd = sys.n() * sys.dim();
    let shape = (sys.n(), sys.dim());
    let q = Points::from_shape_vec(shape, y[..nd].to_vec()).expect("shape");
    let w = Points::from_shape_vec(shape, y[nd..2 * nd].to_vec()).expect("shape");
    (q, w)
}

/// Integrates the rescaled flow over `tau_span = (τ0, τ1)`; `τ1 < τ0` runs backwards.
/// Physical time starts at `0` and is accumulated alongside.
pub fn integrate(sys: &MassSystem, initial: &RescaledState, tau_span: (f64, f64), controls: &Controls) -> Result<Trajectory> {
    let nd = sys.n() * sys.dim();
    let energy = initial.energy;
    let rho0 = crate::potential::rho(sys, &initial.q);
    let rho_switch = controls.rho_switch.unwrap_or(1e-6 * rho0);
    let r_max = controls.r_max.unwrap_or(1e6 * sys.norm(&initial.q));
    let alpha = sys.alpha();

    let mut y0 = Vec::with_capacity(2 * nd + 1);
    y0.extend(initial.q.iter());
    y0.extend(initial.w.iter());
    y0.push(0.0);

    let field = |_tau: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let (q, w) = unflatten(sys, y);
        let u = potential(sys, &q)?;
        let gt = time_scale_from(u, energy, alpha);
        let f = force_from(sys, &q, u)?;
        let fw = sys.inner(&f, &w);
        for (k, (wi, fi)) in w.iter().zip(f.iter()).enumerate() {
            dy[k] = gt * wi;
            dy[nd + k] = fi - fw * wi;
        }
        dy[2 * nd] = rate_from(u, energy, alpha);
        Ok(())
    };

    let mut samples = vec![Sample { tau: tau_span.0, t: 0.0, q: (*initial.q).clone(), w: initial.w.clone() }];
    let mut termination = Termination::SpanEnd;
    let mut max_drift: f64 = 0.0;
    let mut counter = 0usize;
    let mut pending: Option<Sample> = None;
    let every = controls.record_every.max(1);

    let observe = |tau: f64, y: &mut [f64]| -> Flow {
        let (q, w) = unflatten(sys, &y[..]);
        let norm = sys.norm(&w);
        max_drift = max_drift.max((norm - 1.0).abs());
        for x in &mut y[nd..2 * nd] {
            *x /= norm;
        }
        let w = w / norm;
        let sample = Sample { tau, t: y[2 * nd], q: q.clone(), w };
        counter += 1;
        let flow = match potential(sys, &q) {
            Err(_) => {
                termination = Termination::CollisionEvent;
                Flow::Stop
            }
            Ok(u) => {
                if u.powf(-1.0 / alpha) < rho_switch {
                    termination = Termination::CollisionEvent;
                    Flow::Stop
                } else if sys.norm(&q) > r_max {
                    termination = Termination::EscapeEvent;
                    Flow::Stop
                } else if energy + u < controls.eta_hill {
                    termination = Termination::HillEvent;
                    Flow::Stop
                } else {
                    Flow::Continue
                }
            }
        };
        if counter.is_multiple_of(every) {
            samples.push(sample);
            pending = None;
        } else {
            pending = Some(sample);
        }
        flow
    };

    let solver = Solver {
        rtol: controls.rel_tol,
        atol: controls.abs_tol,
        max_steps: controls.max_steps,
        h_max: controls.max_step,
        h_init: None,
    };
    let out = solver.run(field, tau_span.0, &y0, tau_span.1, observe)?;
    if let Some(s) = pending {
        samples.push(s);
    }
    if !out.stopped {
        termination = Termination::SpanEnd;
    }
    Ok(Trajectory { energy, samples, termination, stats: out.stats, max_norm_drift: max_drift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn reduced() -> MassSystem {
        // masses (2,2): the mass norm equals the length of the relative vector
        MassSystem::uniform(2, vec![2.0, 2.0], 1.0, 1.0).unwrap()
    }

    #[test]
    fn speed_scale_example() {
        let sys = MassSystem::uniform(1, vec![1.0, 1.0], 1.0, 1.0).unwrap();
        let q = array![[0.25], [-0.25]];
        assert_eq!(speed_scale(&sys, &q, 0.0).unwrap(), 0.5);
        assert!(matches!(speed_scale(&sys, &q, -2.0), Err(Error::OutsideHillInterior { .. })));
    }

    #[test]
    fn time_scale_examples() {
        let sys = MassSystem::uniform(1, vec![1.0, 1.0], 1.0, 1.0).unwrap();
        let q = array![[0.5], [-0.5]];
        assert_eq!(time_scale(&sys, &q, 0.0).unwrap(), 0.5);
        assert_eq!(time_scale(&sys, &q, -1.0).unwrap(), 0.0);
    }

    #[test]
    fn reduced_two_body_force() {
        let sys = reduced();
        for &alpha in &[0.5, 1.0, 1.5] {
            let sys = MassSystem::uniform(2, vec![2.0, 2.0], 1.0, alpha).unwrap();
            let q = array![[0.3, 0.2], [-0.3, -0.2]];
            let r = sys.norm(&q);
            let f = force_term(&sys, &q).unwrap();
            let expect = &q / r * (-(alpha / 2.0) / (1.0 + r.powf(alpha)));
            assert!((&f - &expect).iter().all(|x| x.abs() < 1e-14));
        }
        let _ = sys;
    }

    #[test]
    fn hill_boundary_freezes_q() {
        let sys = reduced();
        let q = array![[0.5, 0.0], [-0.5, 0.0]];
        let u = potential(&sys, &q).unwrap();
        let w = array![[0.0, 0.5], [0.0, -0.5]] / 1.0;
        let (qd, wd) = rescaled_field(&sys, &q, &w, -u).unwrap();
        assert!(qd.iter().all(|x| *x == 0.0));
        assert!(sys.inner(&w, &wd).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let sys = MassSystem::uniform(2, vec![1.0, 2.0, 3.0], 1.0, 1.0).unwrap();
        let q = sys.center(&array![[1.0, 0.0], [0.0, 1.0], [-1.0, -0.5]]);
        let v = sys.center(&array![[0.1, 0.2], [-0.3, 0.1], [0.2, 0.0]]);
        let phys = PhysicalState::new(&sys, q, v).unwrap();
        let e = phys.energy(&sys).unwrap();
        let res = to_rescaled(&sys, &phys, e).unwrap();
        assert!((sys.norm(&res.w) - 1.0).abs() < 1e-15);
        let back = from_rescaled(&sys, &res).unwrap();
        assert!((&back.v - &phys.v).iter().all(|x| x.abs() < 1e-12));
        assert!(matches!(to_rescaled(&sys, &phys, e + 1.0), Err(Error::Consistency(_))));
    }

    #[test]
    fn rest_velocity_is_rejected() {
        let sys = MassSystem::uniform(1, vec![1.0, 1.0], 1.0, 1.0).unwrap();
        let phys = PhysicalState::new(&sys, array![[0.5], [-0.5]], sys.zeros()).unwrap();
        assert!(to_rescaled(&sys, &phys, -1.0).is_err());
    }

    #[test]
    fn radial_collision_event() {
        let sys = MassSystem::uniform(1, vec![1.0, 1.0], 1.0, 1.0).unwrap();
        let q = array![[0.5], [-0.5]];
        let w = array![[-1.0], [1.0]] / 2f64.sqrt();
        let s = RescaledState::new(&sys, q, w, -0.5).unwrap();
        let traj = integrate(&sys, &s, (0.0, 200.0), &Controls::default()).unwrap();
        assert_eq!(traj.termination, Termination::CollisionEvent);
        let w = array![[1.0], [-1.0]] / 2f64.sqrt();
        let s = RescaledState::new(&sys, array![[0.5], [-0.5]], w, -0.5).unwrap();
        let traj = integrate(&sys, &s, (0.0, 200.0), &Controls::default()).unwrap();
        assert_eq!(traj.termination, Termination::HillEvent);
        assert!(traj.samples.windows(2).all(|p| p[1].t >= p[0].t && p[1].tau > p[0].tau));
    }
}
