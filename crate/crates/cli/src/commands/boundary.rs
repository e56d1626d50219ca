use std::f64::consts::FRAC_PI_2;

use blowup_core::boundary::{
    classify_rest_points, collision_field, hill_fiber_field, hill_rest_points, infinity_field, integrate_torus,
    twobody_collision_closed_form, twobody_hill_closed_form, twobody_infinity_closed_form, Branch,
    CollisionChartState, InfinityChartState, RestPoints, TorusKind, TwoBodyTorusState,
};
use blowup_core::potential::collision_sphere_potential;
use serde_json::json;

use super::{apply_globals, as_points, integrate_flat, point_columns};
use crate::output::{Cell, Format, Summary, Table};
use crate::scenario::Initial;
use crate::{BoundaryArgs, BoundaryKind, BranchArg, CliError, Globals, Scenario, TorusArg};

pub fn boundary(args: &BoundaryArgs, g: &Globals) -> Result<(Table, Summary, Format), CliError> {
    if args.kind == BoundaryKind::TwobodyTorus {
        let (t, s) = twobody_torus(args, g)?;
        return Ok((t, s, g.format.unwrap_or(Format::Csv)));
    }
    let path = args
        .scenario
        .as_ref()
        .ok_or_else(|| CliError::parse("this boundary flow needs a scenario file with the chart state"))?;
    let mut sc = Scenario::load(path)?;
    apply_globals(&mut sc, g);
    let (t, s) = match (args.kind, &sc.initial) {
        (BoundaryKind::Collision, Initial::Collision(st)) => collision(&sc, st)?,
        (BoundaryKind::Infinity, Initial::Infinity { state, energy }) => infinity(&sc, state, *energy)?,
        (BoundaryKind::Hill, Initial::Hill { q0, w, energy }) => hill(&sc, q0, w, *energy)?,
        (k, init) => {
            return Err(CliError::parse(format!(
                "boundary {k:?} needs a matching initial state in the scenario, found a {} state",
                init.flavor()
            )))
        }
    };
    Ok((t, s, g.format.or(sc.format).unwrap_or(Format::Csv)))
}

fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    match k {
        0 => vec![],
        1 => vec![a],
        _ => (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect(),
    }
}

/// Integrated and closed-form solutions through `(θ0, θ0 ± π/2)` side by side.
pub fn twobody_torus(args: &BoundaryArgs, g: &Globals) -> Result<(Table, Summary), CliError> {
    let kind = match args.torus {
        TorusArg::Collision => TorusKind::Collision,
        TorusArg::Infinity => TorusKind::Infinity,
        TorusArg::Hill => TorusKind::Hill,
    };
    let branch = match args.branch {
        BranchArg::Plus => Branch::Plus,
        BranchArg::Minus => Branch::Minus,
    };
    if args.tau_min > args.tau_max {
        return Err(CliError::domain("--tau-min must not exceed --tau-max"));
    }
    let (alpha, energy, theta0) = (args.alpha, args.energy, args.theta0);
    let s = TwoBodyTorusState::new(kind, theta0, theta0 + branch.sign() * FRAC_PI_2, alpha, energy)?;
    let rest = classify_rest_points(kind, energy, alpha)?;
    let (rtol, atol) = (g.tol_rel.unwrap_or(1e-12), g.tol_abs.unwrap_or(1e-14));

    let taus = linspace(args.tau_min, args.tau_max, args.samples);
    let forward: Vec<f64> = taus.iter().copied().filter(|t| *t >= 0.0).collect();
    let backward: Vec<f64> = taus.iter().rev().copied().filter(|t| *t < 0.0).collect();
    let mut numeric = integrate_torus(&s, &backward, rtol, atol)?;
    numeric.reverse();
    numeric.extend(integrate_torus(&s, &forward, rtol, atol)?);

    let mut table = Table::new(["tau", "theta", "w_theta", "psi", "theta_exact", "w_theta_exact", "psi_exact"]);
    let mut max_err: f64 = 0.0;
    for (&tau, &(th, wt)) in taus.iter().zip(&numeric) {
        let (te, we) = match kind {
            TorusKind::Collision => twobody_collision_closed_form(theta0, branch, alpha, tau),
            TorusKind::Infinity => twobody_infinity_closed_form(theta0, branch, energy, tau),
            TorusKind::Hill => twobody_hill_closed_form(theta0, branch, alpha, energy, tau),
        };
        max_err = max_err.max((th - te).abs()).max((wt - we).abs());
        table.push(vec![tau.into(), th.into(), wt.into(), (wt - th).into(), te.into(), we.into(), (we - te).into()]);
    }

    let mut summary = Summary::new("boundary twobody-torus");
    summary
        .set("torus", format!("{kind:?}").to_lowercase())
        .real("alpha", alpha)
        .real("energy", energy)
        .real("max_abs_error", max_err);
    match rest {
        RestPoints::All => {
            summary.set("all_rest_points", true);
        }
        RestPoints::Circles(c) => {
            summary.set("all_rest_points", false).set(
                "rest_circles",
                c.iter().map(|r| json!({"psi": r.psi, "exponent": r.exponent, "stable": r.stable})).collect::<Vec<_>>(),
            );
        }
    }
    Ok((table, summary))
}

fn collision(sc: &Scenario, st: &CollisionChartState) -> Result<(Table, Summary), CliError> {
    let sys = &sc.sys;
    let (n, d) = (sys.n(), sys.dim());
    let nd = n * d;
    let unpack = |y: &[f64]| CollisionChartState {
        part: st.part.clone(),
        q_ext: as_points(n, d, &y[..nd]),
        q_int: as_points(n, d, &y[nd..2 * nd]),
        v_int: y[2 * nd],
        x_int: as_points(n, d, &y[2 * nd + 1..3 * nd + 1]),
        w_ext: as_points(n, d, &y[3 * nd + 1..]),
    };
    let mut y0 = Vec::with_capacity(4 * nd + 1);
    y0.extend(st.q_ext.iter());
    y0.extend(st.q_int.iter());
    y0.push(st.v_int);
    y0.extend(st.x_int.iter());
    y0.extend(st.w_ext.iter());
    let path = integrate_flat(
        sc,
        y0,
        |y, dy| {
            let f = collision_field(sys, &unpack(y))?;
            let mut k = 0;
            for x in f.q_ext.iter().chain(f.q_int.iter()) {
                dy[k] = *x;
                k += 1;
            }
            dy[k] = f.v_int;
            k += 1;
            for x in f.x_int.iter().chain(f.w_ext.iter()) {
                dy[k] = *x;
                k += 1;
            }
            Ok(())
        },
        |_| {},
    )?;

    let mut cols: Vec<String> = ["tau", "v", "x_norm", "w_ext_norm", "W", "closure"].map(String::from).to_vec();
    cols.extend(point_columns("Q", n, d));
    let mut table = Table::new(cols);
    let mut increasing = true;
    let mut closure_drift: f64 = 0.0;
    let mut prev_v = f64::NEG_INFINITY;
    for (tau, y) in &path {
        let s = unpack(y);
        let (w, _) = collision_sphere_potential(sys, &s.part, &s.q_int)?;
        let closure = s.norm_closure(sys)?;
        closure_drift = closure_drift.max((closure - 1.0).abs());
        increasing &= s.v_int > prev_v;
        prev_v = s.v_int;
        let mut row: Vec<Cell> = vec![
            (*tau).into(),
            s.v_int.into(),
            sys.norm(&s.x_int).into(),
            sys.norm(&s.w_ext).into(),
            w.into(),
            closure.into(),
        ];
        row.extend(s.q_int.iter().map(|x| Cell::Real(*x)));
        table.push(row);
    }
    let mut summary = Summary::new("boundary collision");
    summary
        .set("partition", st.part.to_string())
        .set("samples", path.len())
        .set("v_strictly_increasing", increasing)
        .real("v_final", prev_v)
        .real("max_closure_drift", closure_drift);
    Ok((table, summary))
}

fn infinity(sc: &Scenario, st: &InfinityChartState, energy: f64) -> Result<(Table, Summary), CliError> {
    let sys = &sc.sys;
    let (n, d) = (sys.n(), sys.dim());
    let nd = n * d;
    let unpack = |y: &[f64]| InfinityChartState {
        z: y[0],
        q: as_points(n, d, &y[1..nd + 1]),
        w: as_points(n, d, &y[nd + 1..]),
    };
    let at_rest = energy == 0.0 && st.z == 0.0 && infinity_field(sys, st, energy)?.is_zero();
    let mut y0 = vec![st.z];
    y0.extend(st.q.iter());
    y0.extend(st.w.iter());
    let path = integrate_flat(
        sc,
        y0,
        |y, dy| {
            let f = infinity_field(sys, &unpack(y), energy)?;
            dy[0] = f.z;
            for (k, x) in f.q.iter().chain(f.w.iter()).enumerate() {
                dy[k + 1] = *x;
            }
            Ok(())
        },
        |y| {
            let (a, b) = y[1..].split_at_mut(nd);
            for part in [a, b] {
                let p = as_points(n, d, part);
                let norm = sys.norm(&p);
                part.iter_mut().for_each(|x| *x /= norm);
            }
        },
    )?;
    let mut cols = vec!["tau".to_string(), "z".to_string()];
    cols.extend(point_columns("Q", n, d));
    cols.extend(point_columns("w", n, d));
    let mut table = Table::new(cols);
    for (tau, y) in &path {
        let mut row: Vec<Cell> = vec![(*tau).into()];
        row.extend(y.iter().map(|x| Cell::Real(*x)));
        table.push(row);
    }
    let mut summary = Summary::new("boundary infinity");
    summary.real("energy", energy).real("z0", st.z).set("all_rest_points", at_rest).set("samples", path.len());
    Ok((table, summary))
}

fn hill(sc: &Scenario, q0: &blowup_core::Points, w0: &blowup_core::Points, energy: f64) -> Result<(Table, Summary), CliError> {
    let sys = &sc.sys;
    let (n, d) = (sys.n(), sys.dim());
    let (plus, minus) = hill_rest_points(sys, q0)?;
    let eta = sc.controls.eta_hill;
    hill_fiber_field(sys, q0, w0, energy, eta)?;
    let path = integrate_flat(
        sc,
        w0.iter().copied().collect(),
        |y, dy| {
            let f = hill_fiber_field(sys, q0, &as_points(n, d, y), energy, eta)?;
            dy.iter_mut().zip(f.iter()).for_each(|(a, b)| *a = *b);
            Ok(())
        },
        |y| {
            let norm = sys.norm(&as_points(n, d, y));
            y.iter_mut().for_each(|x| *x /= norm);
        },
    )?;
    let angle = |w: &blowup_core::Points, r: &blowup_core::Points| sys.inner(w, r).clamp(-1.0, 1.0).acos();
    let mut cols = vec!["tau".to_string()];
    cols.extend(point_columns("w", n, d));
    cols.push("angle_to_grad".into());
    let mut table = Table::new(cols);
    for (tau, y) in &path {
        let w = as_points(n, d, y);
        let mut row: Vec<Cell> = vec![(*tau).into()];
        row.extend(y.iter().map(|x| Cell::Real(*x)));
        row.push(angle(&w, &plus).into());
        table.push(row);
    }
    let last = as_points(n, d, &path.last().expect("nonempty").1);
    let mut summary = Summary::new("boundary hill");
    summary
        .real("energy", energy)
        .real("final_angle_to_grad", angle(&last, &plus))
        .real("final_angle_to_minus_grad", angle(&last, &minus))
        .set("samples", path.len());
    Ok((table, summary))
}
