use std::path::Path;

use blowup_core::graf::{comparability_audit, count_free_boundary_components_d1, nesting_check, GrafQuery};
use blowup_core::parallel::Exec;
use blowup_core::MassSystem;
use serde::Deserialize;

use super::parse_rows;
use crate::output::{Cell, Summary, Table};
use crate::scenario::SystemSpec;
use crate::{CliError, GrafAction, GrafArgs, Globals};

#[derive(Deserialize)]
struct SystemOnly {
    system: SystemSpec,
}

fn load_system(path: &Path) -> Result<MassSystem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    let f: SystemOnly = toml::from_str(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    crate::scenario::build_system(&f.system)
}

fn system(args: &GrafArgs) -> Result<MassSystem, CliError> {
    if let Some(p) = &args.scenario {
        return load_system(p);
    }
    let masses = args.masses.clone().unwrap_or_else(|| vec![1.0; args.n]);
    Ok(MassSystem::uniform(args.dim, masses, args.coupling, args.alpha)?)
}

pub fn graf(args: &GrafArgs, g: &Globals) -> Result<(Table, Summary), CliError> {
    let sys = system(args)?;
    let (n, d) = (sys.n(), sys.dim());
    let query = GrafQuery::new(&sys, args.delta)?;
    let seed = g.seed.unwrap_or(0);
    let mut summary = Summary::new("graf");
    summary.set("n", n).set("dim", d).real("delta", args.delta);
    let table = match args.action {
        GrafAction::Value => {
            let q = parse_rows("q", args.q.as_deref().ok_or_else(|| CliError::parse("value needs --q"))?, n, d)?;
            let (value, members) = query.graf_value(&q)?;
            let mut t = Table::new(["value", "argmax"]);
            let names: Vec<String> = members.iter().map(ToString::to_string).collect();
            t.push(vec![value.into(), Cell::Text(names.join(" "))]);
            summary.set("ties", members.len());
            t
        }
        GrafAction::Membership => {
            let q = parse_rows("q", args.q.as_deref().ok_or_else(|| CliError::parse("membership needs --q"))?, n, d)?;
            let members = query.atom_membership(&q)?;
            let mut t = Table::new(["partition", "clusters"]);
            for p in &members {
                t.push(vec![Cell::Text(p.to_string()), p.rank().into()]);
            }
            summary.set("atoms", members.len());
            t
        }
        GrafAction::BoundaryPoint => {
            let s = parse_rows("s", args.s.as_deref().ok_or_else(|| CliError::parse("boundary-point needs --s"))?, n, d)?;
            let s = sys.center(&s);
            let norm = sys.norm(&s);
            if norm == 0.0 {
                return Err(CliError::domain("--s must have a nonzero centered part"));
            }
            let h = query.free_atom_boundary_point(&(&s / norm))?;
            let mut cols = vec!["lambda".to_string()];
            cols.extend(super::point_columns("q", n, d));
            let mut t = Table::new(cols);
            let mut row: Vec<Cell> = vec![h.lambda.into()];
            row.extend(h.q.iter().map(|x| Cell::Real(*x)));
            t.push(row);
            summary.real("lambda", h.lambda).set("atoms", query.atom_membership(&h.q)?.len());
            t
        }
        GrafAction::CountComponents => {
            let c = count_free_boundary_components_d1(&query, args.samples, seed, Exec::Parallel)?;
            let mut t = Table::new(["components", "orderings", "samples", "arcs_checked", "broken_arcs"]);
            t.push(vec![c.components.into(), c.orderings.into(), c.samples.into(), c.arcs_checked.into(), c.broken_arcs.into()]);
            summary.set("components", c.components).set("seed", seed);
            t
        }
        GrafAction::Nesting => {
            let r = nesting_check(&sys, args.delta, args.delta2, args.rays, seed, Exec::Parallel)?;
            let mut t = Table::new(["ray", "lambda1", "lambda2"]);
            for (k, l1, l2) in &r.violations {
                t.push(vec![(*k).into(), (*l1).into(), (*l2).into()]);
            }
            summary.real("delta2", args.delta2).set("rays", r.rays).set("violations", r.violations.len()).set("pass", r.pass()).set("seed", seed);
            t
        }
        GrafAction::Comparability => {
            let r = comparability_audit(&query, args.rays, seed, Exec::Parallel)?;
            let mut t = Table::new(["first", "second"]);
            for (a, b, _) in &r.violations {
                t.push(vec![Cell::Text(a.to_string()), Cell::Text(b.to_string())]);
            }
            summary
                .set("points", r.points)
                .set("max_members", r.max_members)
                .set("violations", r.violations.len())
                .set("seed", seed);
            t
        }
    };
    Ok((table, summary))
}
