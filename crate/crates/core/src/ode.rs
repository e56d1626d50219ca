//! Adaptive Dormand–Prince 5(4) integrator over flat state vectors.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

/// What the observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solver {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on `|h|`; `f64::INFINITY` for none.
    pub h_max: f64,
    pub h_init: Option<f64>,
}

impl Default for Solver {
    fn default() -> Self {
        Solver { rtol: 1e-9, atol: 1e-12, max_steps: 1_000_000, h_max: f64::INFINITY, h_init: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub t: f64,
    pub y: Vec<f64>,
    /// True when the observer stopped the run before `t1`.
    pub stopped: bool,
    pub stats: Stats,
}

fn err_norm(rtol: f64, atol: f64, y0: &[f64], y1: &[f64], e: &[f64]) -> f64 {
    let s: f64 = y0
        .iter()
        .zip(y1)
        .zip(e)
        .map(|((a, b), e)| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / y0.len() as f64).sqrt()
}

impl Solver {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Solver { rtol, atol, ..Default::default() }
    }

    fn initial_step<F>(&self, f: &mut F, t0: f64, y0: &[f64], f0: &[f64], dir: f64, span: f64) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let sc = |i: usize| self.atol + self.rtol * y0[i].abs();
        let n = y0.len() as f64;
        let d0 = (y0.iter().enumerate().map(|(i, y)| (y / sc(i)).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (f0.iter().enumerate().map(|(i, y)| (y / sc(i)).powi(2)).sum::<f64>() / n).sqrt();
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(self.h_max).min(span);
        let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, k)| y + dir * h0 * k).collect();
        let mut f1 = vec![0.0; y0.len()];
        if f(t0 + dir * h0, &y1, &mut f1).is_err() {
            return h0 * 0.1;
        }
        let d2 = (f1.iter().zip(f0).enumerate().map(|(i, (a, b))| ((a - b) / sc(i)).powi(2)).sum::<f64>() / n)
            .sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1).min(self.h_max).min(span)
    }

    /// Integrates `y' = f(t, y)` from `t0` towards `t1` (either direction).
    ///
    /// `observe` runs after every accepted step and may modify the state
    /// (projection back onto a constraint surface) or stop the run.
    pub fn run<F, O>(&self, mut f: F, t0: f64, y0: &[f64], t1: f64, mut observe: O) -> Result<Outcome>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
        O: FnMut(f64, &mut [f64]) -> Flow,
    {
        let dim = y0.len();
        let mut stats = Stats::default();
        let mut t = t0;
        let mut y = y0.to_vec();
        if t1 == t0 {
            return Ok(Outcome { t, y, stopped: false, stats });
        }
        let dir = (t1 - t0).signum();
        let mut k1 = vec![0.0; dim];
        f(t, &y, &mut k1)?;
        stats.evaluations += 1;

        let mut h = match self.h_init {
            Some(h) => h.abs().min((t1 - t0).abs()),
            None => {
                stats.evaluations += 1;
                self.initial_step(&mut f, t, &y, &k1, dir, (t1 - t0).abs())
            }
        };
        let mut k2 = vec![0.0; dim];
        let mut k3 = vec![0.0; dim];
        let mut k4 = vec![0.0; dim];
        let mut k5 = vec![0.0; dim];
        let mut k6 = vec![0.0; dim];
        let mut k7 = vec![0.0; dim];
        let mut ys = vec![0.0; dim];
        let mut y_new = vec![0.0; dim];
        let mut err = vec![0.0; dim];
        let mut fac_old: f64 = 1e-4;
        let mut last_rejected = false;
        let expo1 = 0.2 - BETA * 0.75;

        loop {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::MaxSteps(self.max_steps));
            }
            let remaining = (t1 - t).abs();
            let mut last = false;
            if h >= remaining * (1.0 - 1e-12) {
                h = remaining;
                last = true;
            }
            if h <= 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::Stiffness { tau: t, step: h, state: y });
            }
            let hs = dir * h;

            let stages = (|| -> Result<()> {
                for i in 0..dim {
                    ys[i] = y[i] + hs * A21 * k1[i];
                }
                f(t + C2 * hs, &ys, &mut k2)?;
                for i in 0..dim {
                    ys[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
                }
                f(t + C3 * hs, &ys, &mut k3)?;
                for i in 0..dim {
                    ys[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
                }
                f(t + C4 * hs, &ys, &mut k4)?;
                for i in 0..dim {
                    ys[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
                }
                f(t + C5 * hs, &ys, &mut k5)?;
                for i in 0..dim {
                    ys[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
                }
                f(t + hs, &ys, &mut k6)?;
                for i in 0..dim {
                    y_new[i] =
                        y[i] + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
                }
                f(t + hs, &y_new, &mut k7)?;
                Ok(())
            })();
            stats.evaluations += 6;

            if let Err(e) = stages {
                // The trial step left the domain of the field: shrink and retry.
                log::debug!("rejecting step h = {h:e} at t = {t}: {e}");
                stats.rejected += 1;
                last_rejected = true;
                h *= 0.5;
                continue;
            }

            for i in 0..dim {
                err[i] = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let en = err_norm(self.rtol, self.atol, &y, &y_new, &err);
            if !en.is_finite() {
                stats.rejected += 1;
                last_rejected = true;
                h *= 0.5;
                continue;
            }
            let fac11 = en.powf(expo1);
            if en <= 1.0 {
                let fac = (fac11 / fac_old.powf(BETA)) / SAFETY;
                let fac = fac.clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = (h / fac).min(self.h_max);
                if last_rejected {
                    h_new = h_new.min(h);
                }
                fac_old = en.max(1e-4);
                stats.accepted += 1;
                last_rejected = false;

                t = if last { t1 } else { t + hs };
                std::mem::swap(&mut y, &mut y_new);
                ys.copy_from_slice(&y);
                let flow = observe(t, &mut y);
                if ys != y {
                    f(t, &y, &mut k1)?;
                    stats.evaluations += 1;
                } else {
                    std::mem::swap(&mut k1, &mut k7);
                }
                if flow == Flow::Stop {
                    return Ok(Outcome { t, y, stopped: !last, stats });
                }
                if last {
                    return Ok(Outcome { t, y, stopped: false, stats });
                }
                h = h_new;
            } else {
                stats.rejected += 1;
                last_rejected = true;
                h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let s = Solver::new(1e-10, 1e-12);
        let out = s
            .run(
                |_, y, dy| {
                    dy[0] = -y[0];
                    Ok(())
                },
                0.0,
                &[1.0],
                5.0,
                |_, _| Flow::Continue,
            )
            .unwrap();
        assert_eq!(out.t, 5.0);
        assert!((out.y[0] - (-5f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn harmonic_backward() {
        let s = Solver::new(1e-11, 1e-13);
        let out = s
            .run(
                |_, y, dy| {
                    dy[0] = y[1];
                    dy[1] = -y[0];
                    Ok(())
                },
                0.0,
                &[1.0, 0.0],
                -2.0,
                |_, _| Flow::Continue,
            )
            .unwrap();
        assert!((out.y[0] - 2f64.cos()).abs() < 1e-9);
        assert!((out.y[1] - 2f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn observer_stops() {
        let s = Solver::default();
        let out = s
            .run(
                |_, _, dy| {
                    dy[0] = 1.0;
                    Ok(())
                },
                0.0,
                &[0.0],
                10.0,
                |_, y| if y[0] > 1.0 { Flow::Stop } else { Flow::Continue },
            )
            .unwrap();
        assert!(out.stopped);
        assert!(out.t > 1.0 && out.t < 10.0);
    }

    #[test]
    fn domain_errors_shrink_the_step() {
        // y' = -1/sqrt(y) reaches 0 at t = 2/3; the field errors for y <= 0
        let s = Solver { max_steps: 10_000, ..Solver::new(1e-8, 1e-12) };
        let res = s.run(
            |_, y, dy| {
                if y[0] <= 0.0 {
                    return Err(Error::Domain("negative".into()));
                }
                dy[0] = -1.0 / y[0].sqrt();
                Ok(())
            },
            0.0,
            &[1.0],
            1.0,
            |_, _| Flow::Continue,
        );
        assert!(matches!(res, Err(Error::Stiffness { .. }) | Err(Error::MaxSteps(_))));
    }
}
