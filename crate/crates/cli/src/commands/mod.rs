pub mod batch;
pub mod boundary;
pub mod graf;
pub mod simulate;

use blowup_core::ode::{Flow, Solver};
use blowup_core::Points;

use crate::{CliError, Globals, Scenario};

pub fn apply_globals(sc: &mut Scenario, g: &Globals) {
    if let Some(r) = g.tol_rel {
        sc.controls.rel_tol = r;
    }
    if let Some(a) = g.tol_abs {
        sc.controls.abs_tol = a;
    }
}

/// Column names `{prefix}{i}_{k}` for an `n × d` array, 1-based.
pub fn point_columns(prefix: &str, n: usize, d: usize) -> Vec<String> {
    (1..=n).flat_map(|i| (1..=d).map(move |k| format!("{prefix}{i}_{k}"))).collect()
}

pub(crate) fn as_points(n: usize, d: usize, y: &[f64]) -> Points {
    Points::from_shape_vec((n, d), y.to_vec()).expect("state slice has n·d entries")
}

/// Integrates a chart flow given on a flat state, recording every
/// `record_every`-th accepted step and the final state.
pub(crate) fn integrate_flat<F, N>(
    sc: &Scenario,
    y0: Vec<f64>,
    mut field: F,
    mut normalize: N,
) -> Result<Vec<(f64, Vec<f64>)>, CliError>
where
    F: FnMut(&[f64], &mut [f64]) -> blowup_core::Result<()>,
    N: FnMut(&mut [f64]),
{
    let c = &sc.controls;
    let solver = Solver { max_steps: c.max_steps, h_max: c.max_step, ..Solver::new(c.rel_tol, c.abs_tol) };
    let (t0, t1) = sc.tau_span;
    let mut out = vec![(t0, y0.clone())];
    let mut count = 0usize;
    let outcome = solver.run(
        |_, y, dy| field(y, dy),
        t0,
        &y0,
        t1,
        |t, y| {
            normalize(y);
            count += 1;
            if count.is_multiple_of(c.record_every) {
                out.push((t, y.to_vec()));
            }
            Flow::Continue
        },
    )?;
    if out.last().map(|(t, _)| *t) != Some(outcome.t) {
        out.push((outcome.t, outcome.y));
    }
    Ok(out)
}

pub(crate) fn parse_rows(name: &str, text: &str, n: usize, d: usize) -> Result<Points, CliError> {
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(text).map_err(|e| CliError::parse(format!("--{name}: expected a JSON array of rows: {e}")))?;
    if rows.len() != n || rows.iter().any(|r| r.len() != d) {
        return Err(CliError::parse(format!("--{name} must have {n} rows of {d} reals")));
    }
    Ok(as_points(n, d, &rows.concat()))
}
