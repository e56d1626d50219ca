//! Scenario files: a TOML description of a system, an initial condition,
//! integrator controls and the output destination.
//!
//! ```toml
//! energy = -0.75
//!
//! [system]
//! dim = 2
//! masses = [1.0, 1.0]
//! alpha = 1.0
//! coupling = 1.0
//!
//! [initial.physical]
//! q = [[0.5, 0.0], [-0.5, 0.0]]
//! v = [[0.0, 0.5], [0.0, -0.5]]
//!
//! [controls]
//! tau_end = 20.0
//! ```
//!
//! Exactly one of `initial.physical`, `initial.rescaled`,
//! `initial.collision`, `initial.infinity` or `initial.hill` must be given.

use std::path::{Path, PathBuf};

use blowup_core::boundary::{CollisionChartState, InfinityChartState};
use blowup_core::dynamics::{to_rescaled, Controls, PhysicalState, RescaledState};
use blowup_core::potential::potential;
use blowup_core::{MassSystem, Partition, Points};
use serde::Deserialize;

use crate::output::Format;
use crate::CliError;

type Matrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub energy: Option<f64>,
    pub seed: Option<u64>,
    pub system: SystemSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub controls: ControlsSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub diagnostics: DiagnosticsSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub dim: usize,
    pub masses: Vec<f64>,
    #[serde(default = "one")]
    pub alpha: f64,
    /// Uniform `Z_ij`.
    pub coupling: Option<f64>,
    /// Full symmetric `Z` matrix.
    pub couplings: Option<Matrix>,
    /// `Z_ij = G m_i m_j`.
    pub gravitational: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub physical: Option<PhysicalSpec>,
    pub rescaled: Option<RescaledSpec>,
    pub collision: Option<CollisionSpec>,
    pub infinity: Option<InfinitySpec>,
    pub hill: Option<HillSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSpec {
    pub q: Matrix,
    pub v: Matrix,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RescaledSpec {
    pub q: Matrix,
    pub w: Matrix,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionSpec {
    pub partition: String,
    pub q_ext: Matrix,
    pub q_int: Matrix,
    pub v: f64,
    pub x: Matrix,
    pub w_ext: Matrix,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfinitySpec {
    pub z: f64,
    pub q: Matrix,
    pub w: Matrix,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HillSpec {
    pub q0: Matrix,
    pub w: Matrix,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlsSpec {
    pub tau_start: Option<f64>,
    pub tau_end: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_steps: Option<usize>,
    pub max_step: Option<f64>,
    pub rho_switch: Option<f64>,
    pub r_max: Option<f64>,
    pub eta_hill: Option<f64>,
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSpec {
    /// Partitions whose external velocity norm `‖w^E_𝒞‖` is reported; default all pair partitions.
    pub partitions: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    Rescaled(RescaledState),
    Collision(CollisionChartState),
    Infinity { state: InfinityChartState, energy: f64 },
    Hill { q0: Points, w: Points, energy: f64 },
}

impl Initial {
    pub fn flavor(&self) -> &'static str {
        match self {
            Initial::Rescaled(_) => "bulk",
            Initial::Collision(_) => "collision",
            Initial::Infinity { .. } => "infinity",
            Initial::Hill { .. } => "hill",
        }
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub sys: MassSystem,
    pub initial: Initial,
    pub controls: Controls,
    pub tau_span: (f64, f64),
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
    pub diagnostics: Vec<Partition>,
    pub seed: Option<u64>,
}

fn matrix(sys: &MassSystem, name: &str, m: &Matrix) -> Result<Points, CliError> {
    let (n, d) = (sys.n(), sys.dim());
    if m.len() != n || m.iter().any(|r| r.len() != d) {
        return Err(CliError::parse(format!("{name} must be an array of {n} rows of {d} reals")));
    }
    Ok(Points::from_shape_vec((n, d), m.iter().flatten().copied().collect()).expect("checked shape"))
}

fn invalid(what: &str, e: blowup_core::Error) -> CliError {
    CliError::parse(format!("invalid {what}: {e}"))
}

pub fn build_system(s: &SystemSpec) -> Result<MassSystem, CliError> {
    let n = s.masses.len();
    let given = [s.coupling.is_some(), s.couplings.is_some(), s.gravitational.is_some()];
    if given.iter().filter(|g| **g).count() > 1 {
        return Err(CliError::parse("give at most one of system.coupling, system.couplings, system.gravitational"));
    }
    let sys = if let Some(z) = &s.couplings {
        if z.len() != n || z.iter().any(|r| r.len() != n) {
            return Err(CliError::parse(format!("system.couplings must be a {n}×{n} matrix")));
        }
        MassSystem::new(s.dim, s.masses.clone(), z.iter().flatten().copied().collect(), s.alpha)
    } else if let Some(g) = s.gravitational {
        MassSystem::gravitational(s.dim, s.masses.clone(), g, s.alpha)
    } else {
        MassSystem::uniform(s.dim, s.masses.clone(), s.coupling.unwrap_or(1.0), s.alpha)
    };
    sys.map_err(|e| invalid("system", e))
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::parse(format!("{}: {}", path.display(), e.message)))
    }

    pub fn validate(&self) -> Result<Scenario, CliError> {
        let sys = build_system(&self.system)?;
        let init = &self.initial;
        let flavors = [
            init.physical.is_some(),
            init.rescaled.is_some(),
            init.collision.is_some(),
            init.infinity.is_some(),
            init.hill.is_some(),
        ];
        if flavors.iter().filter(|f| **f).count() != 1 {
            return Err(CliError::parse(
                "exactly one of initial.physical, initial.rescaled, initial.collision, initial.infinity, initial.hill is required",
            ));
        }
        let need_energy = |what: &str| {
            self.energy.ok_or_else(|| CliError::parse(format!("energy is required for a {what} initial state")))
        };
        let initial = if let Some(p) = &init.physical {
            let phys = PhysicalState::new(&sys, matrix(&sys, "initial.physical.q", &p.q)?, matrix(&sys, "initial.physical.v", &p.v)?)
                .map_err(|e| invalid("initial state", e))?;
            let e = phys.energy(&sys).map_err(|e| invalid("initial state", e))?;
            if let Some(given) = self.energy {
                if (given - e).abs() > 1e-9 * (1.0 + given.abs()) {
                    return Err(CliError::parse(format!("energy = {given} disagrees with the initial state's energy {e}")));
                }
            }
            Initial::Rescaled(to_rescaled(&sys, &phys, e).map_err(|e| invalid("initial state", e))?)
        } else if let Some(r) = &init.rescaled {
            let q = matrix(&sys, "initial.rescaled.q", &r.q)?;
            let w = matrix(&sys, "initial.rescaled.w", &r.w)?;
            Initial::Rescaled(RescaledState::new(&sys, q, w, need_energy("rescaled")?).map_err(|e| invalid("initial state", e))?)
        } else if let Some(c) = &init.collision {
            let part: Partition = c.partition.parse().map_err(|e| invalid("initial.collision.partition", e))?;
            Initial::Collision(
                CollisionChartState::new(
                    &sys,
                    part,
                    matrix(&sys, "initial.collision.q_ext", &c.q_ext)?,
                    matrix(&sys, "initial.collision.q_int", &c.q_int)?,
                    c.v,
                    matrix(&sys, "initial.collision.x", &c.x)?,
                    matrix(&sys, "initial.collision.w_ext", &c.w_ext)?,
                )
                .map_err(|e| invalid("collision chart state", e))?,
            )
        } else if let Some(i) = &init.infinity {
            let state = InfinityChartState::new(&sys, i.z, matrix(&sys, "initial.infinity.q", &i.q)?, matrix(&sys, "initial.infinity.w", &i.w)?)
                .map_err(|e| invalid("infinity chart state", e))?;
            Initial::Infinity { state, energy: need_energy("infinity")? }
        } else {
            let h = init.hill.as_ref().expect("one flavor present");
            let q0 = matrix(&sys, "initial.hill.q0", &h.q0)?;
            let w = matrix(&sys, "initial.hill.w", &h.w)?;
            if let Some((i, j)) = sys.coincident_pair(&q0) {
                return Err(CliError::parse(format!("initial.hill.q0: particles {} and {} coincide", i + 1, j + 1)));
            }
            let u = potential(&sys, &q0).map_err(|e| invalid("initial.hill.q0", e))?;
            let energy = self.energy.unwrap_or(-u);
            let nw = sys.norm(&w);
            if (nw - 1.0).abs() > 1e-9 {
                return Err(CliError::parse(format!("initial.hill.w must have unit mass norm, got {nw}")));
            }
            Initial::Hill { q0, w, energy }
        };

        let c = &self.controls;
        let d = Controls::default();
        let controls = Controls {
            rel_tol: c.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: c.abs_tol.unwrap_or(d.abs_tol),
            max_steps: c.max_steps.unwrap_or(d.max_steps),
            max_step: c.max_step.unwrap_or(d.max_step),
            rho_switch: c.rho_switch.or(d.rho_switch),
            r_max: c.r_max.or(d.r_max),
            eta_hill: c.eta_hill.unwrap_or(d.eta_hill),
            record_every: c.record_every.unwrap_or(d.record_every).max(1),
        };
        let tau_span = (c.tau_start.unwrap_or(0.0), c.tau_end.unwrap_or(10.0));
        if !(tau_span.0.is_finite() && tau_span.1.is_finite()) {
            return Err(CliError::parse("controls.tau_start and controls.tau_end must be finite"));
        }

        let diagnostics = match &self.diagnostics.partitions {
            Some(list) => list
                .iter()
                .map(|s| {
                    let p: Partition = s.parse().map_err(|e| invalid("diagnostics partition", e))?;
                    if p.n() != sys.n() {
                        return Err(CliError::parse(format!("diagnostics partition {s} is not a partition of {} particles", sys.n())));
                    }
                    Ok(p)
                })
                .collect::<Result<_, _>>()?,
            None => {
                let n = sys.n();
                let mut v = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        v.push(Partition::pair(n, i, j).map_err(|e| invalid("diagnostics", e))?);
                    }
                }
                v
            }
        };

        Ok(Scenario {
            sys,
            initial,
            controls,
            tau_span,
            format: self.output.format,
            path: self.output.path.clone(),
            diagnostics,
            seed: self.seed,
        })
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let sc = ScenarioFile::load(path)?
            .validate()
            .map_err(|e| CliError::parse(format!("{}: {}", path.display(), e.message)))?;
        Ok(sc)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        ScenarioFile::parse(text)?.validate()
    }
}
