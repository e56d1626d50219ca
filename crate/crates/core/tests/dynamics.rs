mod common;

use blowup_core::dynamics::{
    force_term, from_rescaled, integrate, physical_field, rescaled_field, to_rescaled, Controls, PhysicalState,
    RescaledState, Termination,
};
use blowup_core::potential::{grad_potential_euclidean, potential};
use blowup_core::{MassSystem, Points};
use common::*;
use ndarray::{array, Array2};
use proptest::prelude::*;

fn state(sys: &MassSystem, seed: u64, energy_factor: f64) -> RescaledState {
    let q = config(sys, seed, 20);
    let w = direction(sys, seed, 21);
    let u = potential(sys, &q).unwrap();
    RescaledState::normalized(sys, q, w, energy_factor * u).unwrap()
}

fn permute_rows(a: &Points, perm: &[usize]) -> Points {
    Array2::from_shape_fn(a.dim(), |(i, k)| a[[perm[i], k]])
}

fn rotation(d: usize, seed: u64) -> Array2<f64> {
    // orthonormalized Gaussian matrix
    let g = config(&system(d.max(2), d, 1.0, seed), seed, 30);
    let mut r = Array2::<f64>::eye(d);
    for i in 0..d {
        let mut v = r.row(i).to_owned() + &g.row(i % g.nrows()).mapv(|x| 3.0 * x);
        for j in 0..i {
            let p = r.row(j).dot(&v);
            v = &v - &(&r.row(j) * p);
        }
        let norm = v.dot(&v).sqrt();
        r.row_mut(i).assign(&(v / norm));
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn relabeling_commutes_with_the_field((n, d, alpha, seed) in setup(), energy in -0.9f64..2.0) {
        let sys = system(n, d, alpha, seed);
        let s = state(&sys, seed, energy);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left((seed % n as u64) as usize);
        perm.swap(0, n - 1);
        let psys = sys.permuted(&perm).unwrap();
        let (qd, wd) = rescaled_field(&sys, &s.q, &s.w, s.energy).unwrap();
        let (pq, pw) = rescaled_field(&psys, &permute_rows(&s.q, &perm), &permute_rows(&s.w, &perm), s.energy).unwrap();
        let scale = 1.0 + max_abs(&wd) + max_abs(&qd);
        prop_assert!(max_diff(&pq, &permute_rows(&qd, &perm)) <= 1e-13 * scale);
        prop_assert!(max_diff(&pw, &permute_rows(&wd, &perm)) <= 1e-13 * scale);
    }

    #[test]
    fn rotations_commute_with_the_field((n, d, alpha, seed) in setup(), energy in -0.9f64..2.0) {
        let sys = system(n, d, alpha, seed);
        let s = state(&sys, seed, energy);
        let r = rotation(d, seed);
        let rot = |a: &Points| a.dot(&r.t());
        let (qd, wd) = rescaled_field(&sys, &s.q, &s.w, s.energy).unwrap();
        let (rq, rw) = rescaled_field(&sys, &rot(&s.q), &rot(&s.w), s.energy).unwrap();
        let scale = 1.0 + max_abs(&wd) + max_abs(&qd);
        prop_assert!(max_diff(&rq, &rot(&qd)) <= 1e-12 * scale);
        prop_assert!(max_diff(&rw, &rot(&wd)) <= 1e-12 * scale);
    }

    #[test]
    fn velocity_field_is_tangent_to_the_sphere((n, d, alpha, seed) in setup(), energy in -0.9f64..2.0) {
        let sys = system(n, d, alpha, seed);
        let s = state(&sys, seed, energy);
        let (_, wd) = rescaled_field(&sys, &s.q, &s.w, s.energy).unwrap();
        prop_assert!(sys.inner(&s.w, &wd).abs() <= 1e-12 * (1.0 + sys.norm(&wd)));
    }

    #[test]
    fn rescaling_round_trips((n, d, alpha, seed) in setup(), energy in -0.9f64..2.0) {
        let sys = system(n, d, alpha, seed);
        let s = state(&sys, seed, energy);
        let p = from_rescaled(&sys, &s).unwrap();
        prop_assert!((p.energy(&sys).unwrap() - s.energy).abs() <= 1e-10 * (1.0 + s.energy.abs()));
        let back = to_rescaled(&sys, &p, s.energy).unwrap();
        prop_assert!(max_diff(&back.w, &s.w) <= 1e-10);
        prop_assert!((sys.norm(&back.w) - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn newton_field_conserves_energy((n, d, alpha, seed) in setup()) {
        let sys = system(n, d, alpha, seed);
        let q = config(&sys, seed, 22);
        let v = config(&sys, seed, 23);
        let (qd, vd) = physical_field(&sys, &q, &v).unwrap();
        // d/dt (K − U) = <v, v̇>_ℳ − ∇U · q̇
        let du = (potential(&sys, &(&q + &(&qd * 1e-6))).unwrap() - potential(&sys, &(&q - &(&qd * 1e-6))).unwrap()) / 2e-6;
        let dk = sys.inner(&v, &vd);
        let exact = (grad_potential_euclidean(&sys, &q).unwrap() * &qd).sum();
        prop_assert!((dk - exact).abs() <= 1e-12 * (1.0 + dk.abs()));
        prop_assert!((dk - du).abs() <= 1e-6 * (1.0 + dk.abs()));
    }
}

#[test]
fn field_reverses_with_velocity() {
    let sys = system(3, 2, 1.0, 4);
    let s = state(&sys, 4, 0.5);
    let controls = Controls { rel_tol: 1e-12, abs_tol: 1e-14, ..Controls::default() };
    let fwd = integrate(&sys, &s, (0.0, 2.0), &controls).unwrap();
    assert_eq!(fwd.termination, Termination::SpanEnd);
    let end = fwd.last();
    let back = RescaledState::new(&sys, end.q.clone(), -&end.w, s.energy).unwrap();
    let ret = integrate(&sys, &back, (0.0, 2.0), &controls).unwrap();
    assert!(max_diff(&ret.last().q, &s.q) <= 1e-8);
    assert!(max_diff(&ret.last().w, &(-&s.w)) <= 1e-8);
    // negative spans run the same flow backwards
    let rev = integrate(&sys, &RescaledState::new(&sys, end.q.clone(), end.w.clone(), s.energy).unwrap(), (2.0, 0.0), &controls)
        .unwrap();
    assert!(max_diff(&rev.last().q, &s.q) <= 1e-8);
}

#[test]
fn hill_region_is_invariant() {
    for seed in 0..4 {
        let sys = system(3, 2, 1.0, seed);
        let s = state(&sys, seed, -0.6);
        let controls = Controls { rel_tol: 1e-11, abs_tol: 1e-13, ..Controls::default() };
        let traj = integrate(&sys, &s, (0.0, 20.0), &controls).unwrap();
        for sample in &traj.samples {
            let u = potential(&sys, &sample.q).unwrap();
            assert!(s.energy + u >= -1e-9, "seed {seed}: E + U = {}", s.energy + u);
        }
        // physical time never runs backwards
        assert!(traj.samples.windows(2).all(|w| w[1].t >= w[0].t));
    }
}

#[test]
fn force_is_asymptotically_homogeneous_of_degree_zero() {
    for alpha in [0.5, 1.0, 1.5] {
        let sys = MassSystem::uniform(2, vec![1.0, 2.0], 1.0, alpha).unwrap();
        let q = sys.center(&array![[0.6, 0.8], [0.0, 0.0]]);
        let f = |l: f64| force_term(&sys, &(&q * l)).unwrap();
        let gaps: Vec<f64> = [1e-2, 1e-4, 1e-6].windows(2).map(|w| max_diff(&f(w[0]), &f(w[1]))).collect();
        assert!(gaps[1] < 0.2 * gaps[0], "alpha {alpha}: {gaps:?}");
    }
}

#[test]
fn circular_orbit_has_orthogonal_acceleration() {
    // α = 1, unit coupling: circular relative orbit at distance r needs μ|ż|² = 1/r
    let sys = MassSystem::uniform(2, vec![1.0, 3.0], 1.0, 1.0).unwrap();
    let (m1, m2, r): (f64, f64, f64) = (1.0, 3.0, 1.7);
    let mu = m1 * m2 / (m1 + m2);
    let speed = (1.0 / (mu * r)).sqrt();
    let q = array![[m2 / (m1 + m2) * r, 0.0], [-m1 / (m1 + m2) * r, 0.0]];
    let v = array![[0.0, m2 / (m1 + m2) * speed], [0.0, -m1 / (m1 + m2) * speed]];
    let p = PhysicalState::new(&sys, q.clone(), v.clone()).unwrap();
    assert!((sys.inner(&v, &v) - potential(&sys, &q).unwrap()).abs() <= 1e-12);
    let (_, vd) = physical_field(&sys, &p.q, &p.v).unwrap();
    assert!(sys.inner(&v, &vd).abs() <= 1e-12);
}
