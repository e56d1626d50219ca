mod common;

use std::f64::consts::PI;

use blowup_core::boundary::{
    bulk_in_chart, cluster_infinity_field, collision_field, hill_fiber_field, infinity_field, integrate_torus,
    twobody_collision_closed_form, twobody_collision_field, twobody_hill_closed_form, twobody_hill_field,
    twobody_infinity_closed_form, twobody_infinity_field, Branch, CollisionChartState, InfinityChartState, TorusKind,
    TwoBodyTorusState,
};
use blowup_core::dynamics::rescaled_field;
use blowup_core::metric::project_external;
use blowup_core::potential::{collision_sphere_potential, internal_potential, potential};
use blowup_core::{MassSystem, Partition, Points};
use blowup_oracles::torus;
use common::*;
use ndarray::array;
use proptest::prelude::*;

/// Chart coordinates of a random unit-speed bulk state, with `r = 1`.
fn chart_state(sys: &MassSystem, part: &Partition, seed: u64) -> CollisionChartState {
    let q = config(sys, seed, 40);
    let w = direction(sys, seed, 41);
    let s = bulk_in_chart(sys, part, &q, &w, 0.5).unwrap().state;
    CollisionChartState::new(sys, s.part, s.q_ext, s.q_int, s.v_int, s.x_int, s.w_ext).unwrap()
}

fn nontrivial(n: usize, seed: u64) -> Partition {
    let p = random_partition(n, seed);
    if p.is_finest() {
        Partition::pair(n, 0, 1).unwrap()
    } else {
        p
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn collision_field_preserves_chart_invariants((n, d, alpha, seed) in setup()) {
        let sys = system(n, d, alpha, seed);
        let part = nontrivial(n, seed);
        let s = chart_state(&sys, &part, seed);
        let f = collision_field(&sys, &s).unwrap();
        prop_assert_eq!(f.r, 0.0);
        prop_assert!(f.q_ext.iter().all(|x| *x == 0.0));

        let (w, grad_w) = collision_sphere_potential(&sys, &part, &s.q_int).unwrap();
        // J^I(Q) = 1 and <X, Q> = 0 are preserved
        prop_assert!(sys.inner(&s.q_int, &f.q_int).abs() <= 1e-12);
        let xq = sys.inner(&f.x_int, &s.q_int) + sys.inner(&s.x_int, &f.q_int);
        prop_assert!(xq.abs() <= 1e-9 * (1.0 + max_abs(&f.x_int)));
        // so is the closure ‖w^E‖² + ‖X‖² + v²/W = 1
        let w_dot = sys.inner(&grad_w, &f.q_int);
        let closure = 2.0 * sys.inner(&s.w_ext, &f.w_ext) + 2.0 * sys.inner(&s.x_int, &f.x_int)
            + 2.0 * s.v_int * f.v_int / w
            - s.v_int * s.v_int * w_dot / (w * w);
        let scale = 1.0 + f.v_int.abs() / w.sqrt() + max_abs(&f.x_int) + w_dot.abs();
        prop_assert!(closure.abs() <= 1e-9 * scale, "closure derivative {}", closure);
        // internal fields stay internal, external ones external
        prop_assert!(max_abs(&project_external(&sys, &part, &f.x_int).unwrap()) <= 1e-12 * (1.0 + max_abs(&f.x_int)));
        prop_assert!(max_abs(&project_external(&sys, &part, &f.q_int).unwrap()) <= 1e-12 * (1.0 + max_abs(&f.q_int)));
        prop_assert!(max_diff(&project_external(&sys, &part, &f.w_ext).unwrap(), &f.w_ext) <= 1e-12);
    }

    #[test]
    fn radial_velocity_grows_without_external_motion((n, d, alpha, seed) in setup()) {
        let sys = system(n, d, alpha, seed);
        let part = nontrivial(n, seed);
        let s = chart_state(&sys, &part, seed);
        // move all external speed into X, keeping the closure
        let x2 = sys.inner(&s.x_int, &s.x_int);
        let we2 = sys.inner(&s.w_ext, &s.w_ext);
        prop_assume!(x2 > 1e-6);
        let x = &s.x_int * ((x2 + we2) / x2).sqrt();
        let s = CollisionChartState::new(&sys, s.part.clone(), s.q_ext.clone(), s.q_int.clone(), s.v_int, x, sys.zeros()).unwrap();
        let v_dot = collision_field(&sys, &s).unwrap().v_int;
        prop_assert!(v_dot > 0.0);
        let (w, _) = collision_sphere_potential(&sys, &part, &s.q_int).unwrap();
        let expect = w.powf(0.5 - 1.0 / alpha) * (1.0 - alpha / 2.0) * (x2 + we2);
        prop_assert!((v_dot - expect).abs() <= 1e-10 * (1.0 + expect), "{} vs {}", v_dot, expect);
    }

    #[test]
    fn two_body_collision_chart_is_the_torus(theta in -PI..PI, w_theta in -PI..PI, alpha in 0.2f64..1.9) {
        let sys = MassSystem::uniform(2, vec![2.0, 2.0], 1.0, alpha).unwrap();
        let part = Partition::coarsest(2);
        let (q, w) = (unit(theta), unit(w_theta));
        let v = sys.inner(&w, &q);
        let x = &w - &(&q * v);
        let s = CollisionChartState::new(&sys, part, sys.zeros(), q.clone(), v, x.clone(), sys.zeros()).unwrap();
        let f = collision_field(&sys, &s).unwrap();
        // relative vectors z = q1 − q2 and their velocities
        let rel = |a: &Points| [a[[0, 0]] - a[[1, 0]], a[[0, 1]] - a[[1, 1]]];
        let cross = |a: [f64; 2], b: [f64; 2]| a[0] * b[1] - a[1] * b[0];
        let w_dot = &(&q * f.v_int) + &(&f.q_int * v) + &f.x_int; // W ≡ 1 here
        let theta_dot = cross(rel(&q), rel(&f.q_int));
        let w_theta_dot = cross(rel(&w), rel(&w_dot));
        let (et, ew) = twobody_collision_field(theta, w_theta, alpha);
        prop_assert!((theta_dot - et).abs() <= 1e-12 && (w_theta_dot - ew).abs() <= 1e-12,
            "({}, {}) vs ({}, {})", theta_dot, w_theta_dot, et, ew);
    }

    #[test]
    fn two_body_infinity_chart_is_the_torus(theta in -PI..PI, w_theta in -PI..PI, energy in 0.0f64..3.0) {
        let sys = MassSystem::uniform(2, vec![2.0, 2.0], 1.0, 1.0).unwrap();
        let s = InfinityChartState::new(&sys, 0.0, unit(theta), unit(w_theta)).unwrap();
        let f = infinity_field(&sys, &s, energy).unwrap();
        prop_assert_eq!(f.z, 0.0);
        let rel = |a: &Points| [a[[0, 0]] - a[[1, 0]], a[[0, 1]] - a[[1, 1]]];
        let z = rel(&unit(theta));
        let zd = rel(&f.q);
        let (et, ew) = twobody_infinity_field(theta, w_theta, energy);
        prop_assert!((z[0] * zd[1] - z[1] * zd[0] - et).abs() <= 1e-12);
        prop_assert_eq!(max_abs(&f.w), ew);
    }

    #[test]
    fn two_body_hill_fiber_is_the_torus(theta in -PI..PI, w_theta in -PI..PI, alpha in 0.2f64..1.9, r in 0.2f64..3.0) {
        let sys = MassSystem::uniform(2, vec![2.0, 2.0], 1.0, alpha).unwrap();
        let q0 = unit(theta) * r;
        let energy = -potential(&sys, &q0).unwrap();
        let w = unit(w_theta);
        let wd = hill_fiber_field(&sys, &q0, &w, energy, 1e-10).unwrap();
        let rel = |a: &Points| [a[[0, 0]] - a[[1, 0]], a[[0, 1]] - a[[1, 1]]];
        let (a, b) = (rel(&w), rel(&wd));
        let (_, ew) = twobody_hill_field(theta, w_theta, alpha, energy);
        prop_assert!((a[0] * b[1] - a[1] * b[0] - ew).abs() <= 1e-12);
    }

    #[test]
    fn pair_cluster_at_infinity_is_a_two_body_flow(seed in any::<u64>(), alpha in 0.3f64..1.9, energy in -0.5f64..2.0) {
        let sys = system(3, 2, alpha, seed);
        let part = Partition::pair(3, 0, 1).unwrap();
        let q = config(&sys, seed, 50);
        let w = direction(&sys, seed, 51);
        let q_int = &q - &project_external(&sys, &part, &q).unwrap();
        let w_int = &w - &project_external(&sys, &part, &w).unwrap();
        let w_int = &w_int / sys.norm(&w_int);
        let u = internal_potential(&sys, &part, &q_int).unwrap();
        let energy = energy * u;
        let (qd, wd) = cluster_infinity_field(&sys, &part, &q_int, &w_int, energy).unwrap();
        prop_assert!(sys.inner(&w_int, &wd).abs() <= 1e-12 * (1.0 + max_abs(&wd)));

        let sub = sys.subsystem(&[0, 1]).unwrap();
        let rows = |a: &Points| a.slice(ndarray::s![0..2, ..]).to_owned();
        let (sq, sw) = rescaled_field(&sub, &rows(&q_int), &rows(&w_int), energy).unwrap();
        let scale = 1.0 + max_abs(&sq) + max_abs(&sw);
        prop_assert!(max_diff(&rows(&qd), &sq) <= 1e-12 * scale);
        prop_assert!(max_diff(&rows(&wd), &sw) <= 1e-12 * scale);
        prop_assert!(qd.row(2).iter().chain(wd.row(2).iter()).all(|x| x.abs() <= 1e-15));

        // only internal coordinates enter: moving the third particle changes nothing
        let mut far = q_int.clone();
        far.row_mut(2).assign(&array![50.0, -40.0]);
        prop_assert_eq!(cluster_infinity_field(&sys, &part, &far, &w_int, energy).unwrap(), (qd, wd));
    }

    #[test]
    fn closed_forms_match_the_oracle(theta0 in -PI..PI, tau in -20.0f64..20.0, alpha in 0.2f64..1.9, energy in 0.1f64..3.0) {
        for branch in [Branch::Plus, Branch::Minus] {
            let w0 = theta0 + branch.sign() * PI / 2.0;
            let close = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).abs() <= 1e-10 && (a.1 - b.1).abs() <= 1e-10;
            prop_assert!(close(twobody_collision_closed_form(theta0, branch, alpha, tau), torus::collision(theta0, w0, alpha, tau)));
            prop_assert!(close(twobody_infinity_closed_form(theta0, branch, energy, tau), torus::infinity(theta0, w0, energy, tau)));
            prop_assert!(close(twobody_hill_closed_form(theta0, branch, alpha, -energy, tau), torus::hill(theta0, w0, alpha, -energy, tau)));
        }
    }
}

fn unit(theta: f64) -> Points {
    array![[theta.cos() / 2.0, theta.sin() / 2.0], [-theta.cos() / 2.0, -theta.sin() / 2.0]]
}

#[test]
fn collision_torus_constant_of_motion() {
    let taus: Vec<f64> = (0..=60).map(|k| k as f64 * 0.5).collect();
    for alpha in [0.5, 1.0, 1.5] {
        for psi0 in [0.4, 2.0, -1.1] {
            let s = TwoBodyTorusState::new(TorusKind::Collision, 0.2, 0.2 + psi0, alpha, 0.0).unwrap();
            let c0 = s.w_theta - alpha / 2.0 * s.theta;
            for sign in [1.0, -1.0] {
                let ts: Vec<f64> = taus.iter().map(|t| sign * t).collect();
                for (th, wt) in integrate_torus(&s, &ts, 1e-12, 1e-14).unwrap() {
                    assert!((wt - alpha / 2.0 * th - c0).abs() <= 1e-9);
                }
            }
        }
    }
}

#[test]
fn torus_integration_matches_closed_forms() {
    let taus: Vec<f64> = (0..=40).map(|k| k as f64 * 0.5).collect();
    for alpha in [0.5, 1.0, 1.5] {
        for branch in [Branch::Plus, Branch::Minus] {
            let w0 = 0.7 + branch.sign() * PI / 2.0;
            let cases = [
                (TorusKind::Collision, 0.0),
                (TorusKind::Infinity, alpha),
                (TorusKind::Hill, -alpha),
            ];
            for (kind, energy) in cases {
                let s = TwoBodyTorusState::new(kind, 0.7, w0, alpha, energy).unwrap();
                for sign in [1.0, -1.0] {
                    let ts: Vec<f64> = taus.iter().map(|t| sign * t).collect();
                    for (t, (th, wt)) in ts.iter().zip(integrate_torus(&s, &ts, 1e-12, 1e-14).unwrap()) {
                        let (et, ew) = match kind {
                            TorusKind::Collision => twobody_collision_closed_form(0.7, branch, alpha, *t),
                            TorusKind::Infinity => twobody_infinity_closed_form(0.7, branch, energy, *t),
                            TorusKind::Hill => twobody_hill_closed_form(0.7, branch, alpha, energy, *t),
                        };
                        assert!((th - et).abs() <= 1e-8 && (wt - ew).abs() <= 1e-8, "{kind:?} alpha {alpha} tau {t}");
                    }
                }
            }
        }
    }
}
