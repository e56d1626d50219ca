use blowup_core::dynamics::{from_rescaled, integrate, RescaledState, Trajectory};
use blowup_core::metric::project_external;
use blowup_core::potential::{potential, rho};
use blowup_core::{Configuration, MassSystem, Partition};

use super::point_columns;
use crate::output::{Cell, Summary, Table};
use crate::scenario::Initial;
use crate::{CliError, Scenario};

/// One row per sample: `τ, t, q, w, U, ρ` and `‖w^E_𝒞‖` for each diagnostic partition.
pub fn trajectory_table(sys: &MassSystem, traj: &Trajectory, diagnostics: &[Partition]) -> Result<Table, CliError> {
    let (n, d) = (sys.n(), sys.dim());
    let mut cols = vec!["tau".to_string(), "t".to_string()];
    cols.extend(point_columns("q", n, d));
    cols.extend(point_columns("w", n, d));
    cols.push("U".into());
    cols.push("rho".into());
    cols.extend(diagnostics.iter().map(|p| format!("wE{p}")));
    let mut table = Table::new(cols);
    for s in &traj.samples {
        let mut row: Vec<Cell> = vec![s.tau.into(), s.t.into()];
        row.extend(s.q.iter().map(|x| Cell::Real(*x)));
        row.extend(s.w.iter().map(|x| Cell::Real(*x)));
        row.push(potential(sys, &s.q)?.into());
        row.push(rho(sys, &s.q).into());
        for p in diagnostics {
            row.push(sys.norm(&project_external(sys, p, &s.w)?).into());
        }
        table.push(row);
    }
    Ok(table)
}

pub fn simulate(sc: &Scenario) -> Result<(Table, Summary), CliError> {
    let Initial::Rescaled(init) = &sc.initial else {
        return Err(CliError::domain(format!(
            "simulate needs a physical or rescaled initial state, got a {} chart state; use `boundary`",
            sc.initial.flavor()
        )));
    };
    let sys = &sc.sys;
    let traj = integrate(sys, init, sc.tau_span, &sc.controls)?;
    let table = trajectory_table(sys, &traj, &sc.diagnostics)?;
    let last = traj.last();
    let final_state =
        RescaledState { q: Configuration::new(sys, last.q.clone())?, w: last.w.clone(), energy: traj.energy };
    let energy_error = from_rescaled(sys, &final_state)?.energy(sys)? - traj.energy;

    let mut s = Summary::new("simulate");
    s.set("termination", traj.termination.as_str())
        .set("samples", traj.samples.len())
        .real("tau_final", last.tau)
        .real("t_final", last.t)
        .real("energy", traj.energy)
        .real("max_norm_drift", traj.max_norm_drift)
        .real("final_energy_error", energy_error)
        .real("rho_final", rho(sys, &last.q))
        .set("steps_accepted", traj.stats.accepted)
        .set("steps_rejected", traj.stats.rejected);
    Ok((table, s))
}
