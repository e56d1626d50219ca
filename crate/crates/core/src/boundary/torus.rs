//! The invariant boundary tori of the planar two-body problem.
//!
//! With `q = r e^{iθ}`, `w = e^{i w_θ}` and `ψ = w_θ − θ` the boundary
//! components at collision, at infinity and at the Hill boundary are tori
//! with coordinates `(θ, w_θ)` carrying
//!
//! ```text
//! collision:  θ' = sin ψ,    w_θ' = (α/2) sin ψ
//! infinity:   θ' = E sin ψ,  w_θ' = 0
//! hill:       θ' = 0,        w_θ' = c sin ψ,   c = (α/2) / (1 + 1/|E|)
//! ```

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};
use crate::ode::{Flow, Solver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TorusKind {
    Collision,
    Infinity,
    Hill,
}

impl std::str::FromStr for TorusKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "collision" => Ok(TorusKind::Collision),
            "infinity" => Ok(TorusKind::Infinity),
            "hill" => Ok(TorusKind::Hill),
            _ => Err(Error::Parse(format!("unknown torus {s:?}; expected collision, infinity or hill"))),
        }
    }
}

/// Sign of the initial offset `w_θ(0) = θ(0) ± π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// A point of one of the tori together with the parameters of its flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoBodyTorusState {
    pub kind: TorusKind,
    pub theta: f64,
    pub w_theta: f64,
    pub alpha: f64,
    pub energy: f64,
}

impl TwoBodyTorusState {
    pub fn new(kind: TorusKind, theta: f64, w_theta: f64, alpha: f64, energy: f64) -> Result<Self> {
        check_params(kind, alpha, energy)?;
        Ok(TwoBodyTorusState { kind, theta, w_theta, alpha, energy })
    }

    pub fn psi(&self) -> f64 {
        self.w_theta - self.theta
    }

    /// Angles reduced to `[0, 2π)`.
    pub fn reduced(&self) -> (f64, f64) {
        (self.theta.rem_euclid(TAU), self.w_theta.rem_euclid(TAU))
    }
}

fn check_params(kind: TorusKind, alpha: f64, energy: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    match kind {
        TorusKind::Infinity if energy < 0.0 => {
            Err(Error::Domain(format!("spatial infinity is not reached at energy {energy} < 0")))
        }
        TorusKind::Hill if energy >= 0.0 => {
            Err(Error::Domain(format!("the Hill region has no boundary at energy {energy} >= 0")))
        }
        _ => Ok(()),
    }
}

/// `c = (α/2)/(1 + 1/|E|)`.
pub fn hill_rate(alpha: f64, energy: f64) -> f64 {
    alpha / 2.0 / (1.0 + 1.0 / energy.abs())
}

pub fn twobody_collision_field(theta: f64, w_theta: f64, alpha: f64) -> (f64, f64) {
    let s = (w_theta - theta).sin();
    (s, alpha / 2.0 * s)
}

pub fn twobody_infinity_field(theta: f64, w_theta: f64, energy: f64) -> (f64, f64) {
    (energy * (w_theta - theta).sin(), 0.0)
}

pub fn twobody_hill_field(theta: f64, w_theta: f64, alpha: f64, energy: f64) -> (f64, f64) {
    (0.0, hill_rate(alpha, energy) * (w_theta - theta).sin())
}

/// `(θ', w_θ')` for whichever torus the state lives on.
pub fn torus_field(s: &TwoBodyTorusState) -> (f64, f64) {
    match s.kind {
        TorusKind::Collision => twobody_collision_field(s.theta, s.w_theta, s.alpha),
        TorusKind::Infinity => twobody_infinity_field(s.theta, s.w_theta, s.energy),
        TorusKind::Hill => twobody_hill_field(s.theta, s.w_theta, s.alpha, s.energy),
    }
}

fn acot(x: f64) -> f64 {
    (1.0 / x).atan()
}

/// Solution through `(θ0, θ0 ± π/2)` on the collision torus, `k = 1 − α/2`:
/// `θ = θ0 ± (π/2 − 2 acot(e^{kτ}))/k`, `w_θ = θ0 ± (π/2 − α acot(e^{kτ}))/k`.
pub fn twobody_collision_closed_form(theta0: f64, branch: Branch, alpha: f64, tau: f64) -> (f64, f64) {
    let k = 1.0 - alpha / 2.0;
    let a = acot((k * tau).exp());
    let s = branch.sign();
    (theta0 + s * (FRAC_PI_2 - 2.0 * a) / k, theta0 + s * (FRAC_PI_2 - alpha * a) / k)
}

/// Solution through `(θ0, θ0 ± π/2)` on the infinity torus: `w_θ` is constant and
/// `θ = θ0 ± (π/2 − 2 atan(e^{−Eτ}))`.
pub fn twobody_infinity_closed_form(theta0: f64, branch: Branch, energy: f64, tau: f64) -> (f64, f64) {
    let s = branch.sign();
    (theta0 + s * (FRAC_PI_2 - 2.0 * (-energy * tau).exp().atan()), theta0 + s * FRAC_PI_2)
}

/// Solution through `(θ0, θ0 ± π/2)` on the Hill torus: `θ` is constant and
/// `w_θ = w_θ(0) ∓ (π/2 − 2 atan(e^{cτ}))`, so that `ψ = ±2 atan(e^{cτ})` leaves `0` for `π`.
pub fn twobody_hill_closed_form(theta0: f64, branch: Branch, alpha: f64, energy: f64, tau: f64) -> (f64, f64) {
    let c = hill_rate(alpha, energy);
    let s = branch.sign();
    (theta0, theta0 + s * FRAC_PI_2 - s * (FRAC_PI_2 - 2.0 * (c * tau).exp().atan()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestCircle {
    /// `ψ` on the circle, `0` or `π`.
    pub psi: f64,
    /// Linearization `∂ψ'/∂ψ` on the circle.
    pub exponent: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RestPoints {
    Circles(Vec<RestCircle>),
    /// Every point of the torus is a rest point.
    All,
}

/// Rest circles `ψ = 0, π` with stability from the 1-D linearization of the `ψ` equation.
pub fn classify_rest_points(kind: TorusKind, energy: f64, alpha: f64) -> Result<RestPoints> {
    check_params(kind, alpha, energy)?;
    // ψ' = −κ sin ψ, so ∂ψ'/∂ψ = −κ cos ψ
    let kappa = match kind {
        TorusKind::Collision => 1.0 - alpha / 2.0,
        TorusKind::Infinity => energy,
        TorusKind::Hill => -hill_rate(alpha, energy),
    };
    if kappa == 0.0 {
        return Ok(RestPoints::All);
    }
    Ok(RestPoints::Circles(
        [0.0, PI]
            .into_iter()
            .map(|psi| {
                let exponent = -kappa * psi.cos();
                RestCircle { psi, exponent, stable: exponent < 0.0 }
            })
            .collect(),
    ))
}

/// Integrates a torus flow and reports `(θ, w_θ)` at each requested `τ`.
/// The times must be monotone, starting from `τ = 0` at `s`.
pub fn integrate_torus(s: &TwoBodyTorusState, taus: &[f64], rtol: f64, atol: f64) -> Result<Vec<(f64, f64)>> {
    let solver = Solver { max_steps: 10_000_000, ..Solver::new(rtol, atol) };
    let field = |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let st = TwoBodyTorusState { theta: y[0], w_theta: y[1], ..*s };
        let (a, b) = torus_field(&st);
        dy[0] = a;
        dy[1] = b;
        Ok(())
    };
    let mut y = vec![s.theta, s.w_theta];
    let mut t = 0.0;
    let mut out = Vec::with_capacity(taus.len());
    for &target in taus {
        let o = solver.run(field, t, &y, target, |_, _| Flow::Continue)?;
        y = o.y;
        t = target;
        out.push((y[0], y[1]));
    }
    Ok(out)
}

/// Distance on the circle.
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularization {
    pub alpha: f64,
    /// The unstable rest point the two orbits leave, `(θ_u, θ_u + π)`.
    pub theta_unstable: f64,
    /// Forward limits `θ(+∞)` of the two unstable orbits.
    pub limits: (f64, f64),
    /// Circle distance between the two limits.
    pub gap: f64,
}

/// Follows both unstable orbits of the collision-torus rest point
/// `(θ_u, θ_u + π)` numerically to `τ_end`. They start on the level set of
/// the invariant `w_θ − (α/2)θ` through the rest point, at `θ_u ± δ`.
pub fn regularization_check(alpha: f64, theta_u: f64, delta: f64, tau_end: f64, rtol: f64) -> Result<Regularization> {
    let mut limits = [0.0; 2];
    for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
        let s = TwoBodyTorusState::new(
            TorusKind::Collision,
            theta_u + sign * delta,
            theta_u + PI + sign * alpha / 2.0 * delta,
            alpha,
            0.0,
        )?;
        limits[k] = integrate_torus(&s, &[tau_end], rtol, rtol * 1e-2)?[0].0;
    }
    Ok(Regularization {
        alpha,
        theta_unstable: theta_u,
        limits: (limits[0], limits[1]),
        gap: angle_gap(limits[0], limits[1]),
    })
}

/// `α = 2(1 − 1/m)`.
pub fn regularizable_alpha(m: u32) -> f64 {
    2.0 * (1.0 - 1.0 / m as f64)
}
