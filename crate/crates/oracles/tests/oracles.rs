use blowup_oracles::{exhaustive_partition_oracle, finite_difference_gradient, torus, OracleReport, PlainSystem};
use proptest::prelude::*;

proptest! {
    #[test]
    fn gradient_of_a_quadratic_form(x in prop::collection::vec(-3.0f64..3.0, 1..8), m in prop::collection::vec(0.5f64..3.0, 8)) {
        // J(x) = Σ m_k x_k² has gradient 2 m_k x_k
        let f = |y: &[f64]| y.iter().zip(&m).map(|(a, b)| b * a * a).sum::<f64>();
        let g = finite_difference_gradient(f, &x, 1e-5);
        for (k, gk) in g.iter().enumerate() {
            prop_assert!((gk - 2.0 * m[k] * x[k]).abs() <= 1e-8);
        }
    }

    #[test]
    fn potential_gradient_is_the_acceleration(seed in prop::collection::vec(-1.0f64..1.0, 6), alpha in 0.3f64..1.9) {
        let sys = PlainSystem::uniform(2, vec![1.0, 2.0, 0.5], 1.0, alpha);
        let q: Vec<f64> = seed.iter().enumerate().map(|(k, x)| x + k as f64).collect();
        let g = finite_difference_gradient(|y| sys.potential(y), &q, 1e-6);
        let mut a = vec![0.0; 6];
        sys.acceleration(&q, &mut a);
        for k in 0..6 {
            OracleReport::new("m a vs grad U", g[k], a[k] * sys.masses[k / 2], 1e-6).assert();
        }
    }

    #[test]
    fn torus_solutions_solve_their_fields(theta0 in -3.0f64..3.0, psi0 in -3.0f64..3.0, tau in -10.0f64..10.0, alpha in 0.2f64..1.9, e in 0.1f64..3.0) {
        let w0 = theta0 + psi0;
        let h = 1e-5;
        let diff = |f: &dyn Fn(f64) -> (f64, f64)| {
            let (a, b) = (f(tau + h), f(tau - h));
            ((a.0 - b.0) / (2.0 * h), (a.1 - b.1) / (2.0 * h), f(tau))
        };
        let (dt, dw, (th, wt)) = diff(&|t| torus::collision(theta0, w0, alpha, t));
        let s = (wt - th).sin();
        prop_assert!((dt - s).abs() <= 1e-6 && (dw - alpha / 2.0 * s).abs() <= 1e-6);
        let (dt, dw, (th, wt)) = diff(&|t| torus::infinity(theta0, w0, e, t));
        prop_assert!((dt - e * (wt - th).sin()).abs() <= 1e-6 && dw == 0.0);
        let c = alpha / 2.0 / (1.0 + 1.0 / e);
        let (dt, dw, (th, wt)) = diff(&|t| torus::hill(theta0, w0, alpha, -e, t));
        prop_assert!(dt == 0.0 && (dw - c * (wt - th).sin()).abs() <= 1e-6);
    }
}

#[test]
fn refinement_is_a_partial_order() {
    for n in 1..=5 {
        let lat = exhaustive_partition_oracle(n).unwrap();
        let r = &lat.refines;
        for a in 0..lat.len() {
            assert!(r[a][a]);
            for b in 0..lat.len() {
                if a != b {
                    assert!(!(r[a][b] && r[b][a]));
                }
                for c in 0..lat.len() {
                    assert!(!(r[a][b] && r[b][c]) || r[a][c]);
                }
            }
        }
    }
}
