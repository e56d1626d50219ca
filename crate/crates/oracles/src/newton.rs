//! Newton's equations `m_i q̈_i = ∂U/∂q_i` with `U = Σ Z_ij / ‖q_i − q_j‖^α`,
//! integrated by classic RK4 with step doubling and Richardson extrapolation.

/// Physical constants as plain data. Positions and velocities are flat
/// row-major `n × d` slices.
#[derive(Debug, Clone, PartialEq)]
pub struct PlainSystem {
    pub dim: usize,
    pub masses: Vec<f64>,
    /// Full symmetric `n × n` table, row-major.
    pub couplings: Vec<f64>,
    pub alpha: f64,
}

impl PlainSystem {
    pub fn uniform(dim: usize, masses: Vec<f64>, z: f64, alpha: f64) -> Self {
        let n = masses.len();
        PlainSystem { dim, masses, couplings: vec![z; n * n], alpha }
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    fn z(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n() + j]
    }

    /// `Σ_{i<j} Z_ij ‖q_i − q_j‖^{−α}`.
    pub fn potential(&self, q: &[f64]) -> f64 {
        let (n, d) = (self.n(), self.dim);
        let mut u = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let r2: f64 = (0..d).map(|k| (q[i * d + k] - q[j * d + k]).powi(2)).sum();
                u += self.z(i, j) * r2.powf(-self.alpha / 2.0);
            }
        }
        u
    }

    /// Accelerations `ℳ⁻¹∇U`.
    pub fn acceleration(&self, q: &[f64], out: &mut [f64]) {
        let (n, d) = (self.n(), self.dim);
        out.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let r2: f64 = (0..d).map(|k| (q[i * d + k] - q[j * d + k]).powi(2)).sum();
                let c = self.alpha * self.z(i, j) * r2.powf(-(self.alpha + 2.0) / 2.0) / self.masses[i];
                for k in 0..d {
                    out[i * d + k] -= c * (q[i * d + k] - q[j * d + k]);
                }
            }
        }
    }

    /// `K − U`.
    pub fn energy(&self, q: &[f64], v: &[f64]) -> f64 {
        let d = self.dim;
        let k: f64 = self
            .masses
            .iter()
            .enumerate()
            .map(|(i, m)| 0.5 * m * (0..d).map(|k| v[i * d + k].powi(2)).sum::<f64>())
            .sum();
        k - self.potential(q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonRun {
    /// Requested output times that were reached.
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    /// Largest `|H(t) − H(0)|` over all accepted steps.
    pub energy_drift: f64,
    /// Final time actually reached; less than the last request when the
    /// step size collapsed near a collision.
    pub reached: f64,
    pub steps: usize,
}

fn rk4(sys: &PlainSystem, y: &[f64], h: f64) -> Vec<f64> {
    let m = y.len() / 2;
    let f = |y: &[f64]| {
        let mut dy = vec![0.0; y.len()];
        dy[..m].copy_from_slice(&y[m..]);
        sys.acceleration(&y[..m], &mut dy[m..]);
        dy
    };
    let axpy = |a: &[f64], s: f64, b: &[f64]| a.iter().zip(b).map(|(x, y)| x + s * y).collect::<Vec<_>>();
    let k1 = f(y);
    let k2 = f(&axpy(y, h / 2.0, &k1));
    let k3 = f(&axpy(y, h / 2.0, &k2));
    let k4 = f(&axpy(y, h, &k3));
    (0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

/// Integrates from `t = 0` and reports the state at each time of `t_out`
/// (sorted, same sign). `rtol` bounds the local error per step.
pub fn newton_reference(sys: &PlainSystem, q0: &[f64], v0: &[f64], t_out: &[f64], rtol: f64) -> NewtonRun {
    let m = q0.len();
    let mut y: Vec<f64> = q0.iter().chain(v0).copied().collect();
    let e0 = sys.energy(q0, v0);
    let mut run = NewtonRun {
        times: Vec::new(),
        positions: Vec::new(),
        velocities: Vec::new(),
        energy_drift: 0.0,
        reached: 0.0,
        steps: 0,
    };
    let mut t = 0.0f64;
    let dir = t_out.last().map_or(1.0, |x| if *x < 0.0 { -1.0 } else { 1.0 });
    let mut h = 1e-3f64;
    let atol = rtol * 1e-2;
    for &target in t_out {
        while (target - t) * dir > 0.0 {
            let last = h >= (target - t).abs();
            let step = if last { (target - t).abs() } else { h };
            let full = rk4(sys, &y, dir * step);
            let half = rk4(sys, &rk4(sys, &y, dir * step / 2.0), dir * step / 2.0);
            let err = full
                .iter()
                .zip(&half)
                .map(|(a, b)| (a - b).abs() / 15.0 / (atol + rtol * b.abs()))
                .fold(0.0, f64::max);
            if err <= 1.0 {
                y = half.iter().zip(&full).map(|(b, a)| b + (b - a) / 15.0).collect();
                t = if last { target } else { t + dir * step };
                run.steps += 1;
                run.energy_drift = run.energy_drift.max((sys.energy(&y[..m], &y[m..]) - e0).abs());
            }
            let fac = if err == 0.0 { 4.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 4.0) };
            if !last || err > 1.0 {
                h = step * fac;
            }
            if h < 1e-13 * t.abs().max(1.0) {
                run.reached = t;
                return run;
            }
        }
        run.times.push(target);
        run.positions.push(y[..m].to_vec());
        run.velocities.push(y[m..].to_vec());
    }
    run.reached = t;
    run
}

/// Period of the bounded `α = 1` two-body orbit with semi-major axis `a`:
/// the relative vector obeys `ẍ = −(Z/μ) x/‖x‖³` with `μ = m₁m₂/(m₁+m₂)`.
pub fn kepler_period(m1: f64, m2: f64, z: f64, a: f64) -> f64 {
    let mu = m1 * m2 / (m1 + m2);
    2.0 * std::f64::consts::PI * (a.powi(3) * mu / z).sqrt()
}

/// Energy `−Z/(2a)` of that orbit.
pub fn kepler_energy(z: f64, a: f64) -> f64 {
    -z / (2.0 * a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kepler_start(e: f64) -> (PlainSystem, Vec<f64>, Vec<f64>) {
        // masses (1,1), Z = 1, a = 1, released at apoapsis r = 1 + e
        let sys = PlainSystem::uniform(2, vec![1.0, 1.0], 1.0, 1.0);
        let r = 1.0 + e;
        let vrel = (2.0 * (2.0 / r - 1.0)).sqrt();
        let q = vec![r / 2.0, 0.0, -r / 2.0, 0.0];
        let v = vec![0.0, vrel / 2.0, 0.0, -vrel / 2.0];
        (sys, q, v)
    }

    #[test]
    fn kepler_period_closes_orbit() {
        let (sys, q, v) = kepler_start(0.5);
        assert!((sys.energy(&q, &v) - kepler_energy(1.0, 1.0)).abs() < 1e-14);
        let period = kepler_period(1.0, 1.0, 1.0, 1.0);
        let run = newton_reference(&sys, &q, &v, &[period], 1e-12);
        for k in 0..4 {
            assert!((run.positions[0][k] - q[k]).abs() < 1e-8, "{:?}", run.positions[0]);
        }
        assert!(run.energy_drift < 1e-10, "{}", run.energy_drift);
    }

    #[test]
    fn time_reversal() {
        let (sys, q, v) = kepler_start(0.3);
        let fwd = newton_reference(&sys, &q, &v, &[2.0], 1e-12);
        let vb: Vec<f64> = fwd.velocities[0].iter().map(|x| -x).collect();
        let back = newton_reference(&sys, &fwd.positions[0], &vb, &[2.0], 1e-12);
        for k in 0..4 {
            assert!((back.positions[0][k] - q[k]).abs() < 1e-8);
            assert!((back.velocities[0][k] + v[k]).abs() < 1e-8);
        }
    }
}
