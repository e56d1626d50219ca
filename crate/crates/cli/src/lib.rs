//! The `blowup` command-line tool.
//!
//! Exit codes: `0` success, `2` parse error, `3` domain error, `4` numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod output;
pub mod scenario;

pub use output::{Format, Summary, Table};
pub use scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Domain,
    Numerical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn parse(msg: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Parse, message: msg.into() }
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Domain, message: msg.into() }
    }

    pub(crate) fn output(e: impl std::fmt::Display) -> Self {
        CliError::domain(format!("cannot write output: {e}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Parse => 2,
            ErrorKind::Domain => 3,
            ErrorKind::Numerical => 4,
        }
    }
}

impl From<blowup_core::Error> for CliError {
    fn from(e: blowup_core::Error) -> Self {
        let kind = match &e {
            blowup_core::Error::Parse(_) => ErrorKind::Parse,
            e if e.is_numerical() => ErrorKind::Numerical,
            _ => ErrorKind::Domain,
        };
        let message = match &e {
            blowup_core::Error::Stiffness { state, .. } => format!("{e}; last state {state:?}"),
            _ => e.to_string(),
        };
        CliError { kind, message }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(name = "blowup", version, about = "Simulate compactified n-body flows and query Graf partitions")]
pub struct Cli {
    #[command(flatten)]
    pub globals: Globals,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Globals {
    /// Output file (a directory for `batch`); standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for every sampling command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Relative integration tolerance, overriding the scenario.
    #[arg(long, global = true)]
    pub tol_rel: Option<f64>,
    /// Absolute integration tolerance, overriding the scenario.
    #[arg(long, global = true)]
    pub tol_abs: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a bulk scenario in the rescaled picture.
    Simulate { scenario: PathBuf },
    /// Integrate a boundary flow.
    Boundary(BoundaryArgs),
    /// Query the Graf covering.
    Graf(GrafArgs),
    /// Run several bulk scenarios concurrently, one output file each.
    Batch {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryKind {
    Collision,
    Infinity,
    Hill,
    TwobodyTorus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TorusArg {
    Collision,
    Infinity,
    Hill,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Args)]
pub struct BoundaryArgs {
    pub kind: BoundaryKind,
    /// Scenario with an `initial.collision`, `initial.infinity` or `initial.hill` state.
    pub scenario: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "collision")]
    pub torus: TorusArg,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub energy: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta0: f64,
    #[arg(long, value_enum, default_value = "plus")]
    pub branch: BranchArg,
    #[arg(long, default_value_t = -20.0, allow_negative_numbers = true)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 401)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GrafAction {
    Value,
    Membership,
    BoundaryPoint,
    CountComponents,
    Nesting,
    Comparability,
}

#[derive(Debug, Clone, Args)]
pub struct GrafArgs {
    pub action: GrafAction,
    /// Take the system from a scenario file instead of the flags below.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, short = 'n', default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Comma-separated masses; all ones when absent.
    #[arg(long, value_delimiter = ',')]
    pub masses: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub coupling: f64,
    #[arg(long, default_value_t = blowup_core::graf::DEFAULT_DELTA)]
    pub delta: f64,
    /// Larger parameter for `nesting`.
    #[arg(long, default_value_t = 0.5)]
    pub delta2: f64,
    /// Configuration as a JSON array of rows, for `value` and `membership`.
    #[arg(long)]
    pub q: Option<String>,
    /// Direction as a JSON array of rows, for `boundary-point`; normalized and centered.
    #[arg(long)]
    pub s: Option<String>,
    /// Samples per component for `count-components`.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Rays for `nesting`, tie points for `comparability`.
    #[arg(long, default_value_t = 1000)]
    pub rays: usize,
}

/// Writes a command's table and summary. With an output path the table goes
/// there and the summary to standard output; otherwise the table goes to
/// standard output and the summary to standard error.
pub fn emit(table: &Table, summary: &Summary, path: Option<&Path>, format: Format) -> Result<(), CliError> {
    match path {
        Some(p) => {
            table.write_to_path(p, format)?;
            println!("{summary}");
        }
        None => {
            table.write(std::io::stdout().lock(), format)?;
            let _ = writeln!(std::io::stderr(), "{summary}");
        }
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let g = &cli.globals;
    match &cli.command {
        Command::Simulate { scenario } => {
            let mut sc = Scenario::load(scenario)?;
            commands::apply_globals(&mut sc, g);
            let (table, summary) = commands::simulate::simulate(&sc)?;
            let format = g.format.or(sc.format).unwrap_or(Format::Csv);
            let path = g.out.clone().or(sc.path.clone());
            emit(&table, &summary, path.as_deref(), format)
        }
        Command::Boundary(args) => {
            let (table, summary, format) = commands::boundary::boundary(args, g)?;
            emit(&table, &summary, g.out.as_deref(), format)
        }
        Command::Graf(args) => {
            let (table, summary) = commands::graf::graf(args, g)?;
            emit(&table, &summary, g.out.as_deref(), g.format.unwrap_or(Format::Csv))
        }
        Command::Batch { scenarios } => commands::batch::batch(scenarios, g),
    }
}
