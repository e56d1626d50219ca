//! Two-body boundary tori solved through `ψ = w_θ − θ`.
//!
//! Each torus flow reduces to `ψ' = −κ sin ψ`, whose solution through
//! `ψ(0) = ψ0 ∈ (−π, π)` is `tan(ψ/2) = tan(ψ0/2) e^{−κτ}`. The angles are
//! then recovered from first integrals.

fn psi(psi0: f64, kappa: f64, tau: f64) -> f64 {
    2.0 * ((psi0 / 2.0).tan() * (-kappa * tau).exp()).atan()
}

/// Collision torus: `θ' = sin ψ`, `w_θ' = (α/2) sin ψ`.
/// Uses `κ = 1 − α/2` and the invariant `w_θ − (α/2)θ`.
pub fn collision(theta0: f64, w0: f64, alpha: f64, tau: f64) -> (f64, f64) {
    let k = 1.0 - alpha / 2.0;
    let c = w0 - alpha / 2.0 * theta0;
    let p = psi(w0 - theta0, k, tau);
    // ψ = c − kθ
    let theta = (c - p) / k;
    (theta, c + alpha / 2.0 * theta)
}

/// Infinity torus: `θ' = E sin ψ`, `w_θ' = 0`.
pub fn infinity(theta0: f64, w0: f64, energy: f64, tau: f64) -> (f64, f64) {
    let p = psi(w0 - theta0, energy, tau);
    (w0 - p, w0)
}

/// Hill torus: `θ' = 0`, `w_θ' = c sin ψ` with `c = (α/2)/(1 + 1/|E|)`.
pub fn hill(theta0: f64, w0: f64, alpha: f64, energy: f64, tau: f64) -> (f64, f64) {
    let c = alpha / 2.0 / (1.0 + 1.0 / energy.abs());
    let p = psi(w0 - theta0, -c, tau);
    (theta0, theta0 + p)
}
