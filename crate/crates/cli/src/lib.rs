//! `cwpath` command-line front end: scenario ingestion, subcommand dispatch,
//! CSV output and run manifests.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 validation error, 3 infeasible or
//! uncertified result.

pub mod commands;
pub mod output;
pub mod scenario;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use output::{Dataset, FileEntry, RunManifest, MANIFEST_NAME};
pub use scenario::ScenarioFile;

pub const TOOL: &str = "cwpath";
pub const THREADS_VAR: &str = "CWPATH_THREADS";
pub const DEFAULT_OUT: &str = "cwpath-out";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Core(cwpath::Error),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), message: e.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io { .. } => 1,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

impl From<cwpath::Error> for CliError {
    fn from(e: cwpath::Error) -> Self {
        CliError::Core(e)
    }
}

/// Result-class errors map to 3; anything wrong with the inputs maps to 2.
pub fn core_exit_code(e: &cwpath::Error) -> i32 {
    use cwpath::Error::*;
    match e {
        Unreachable { .. } | BoundaryNotClear { .. } | NoWitness => 3,
        _ => 2,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Propagate,
    Bound,
    Reach,
    Invert,
    PlanCfk,
    PlanCfm,
    VerifyFacts,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Propagate => "propagate",
            Command::Bound => "bound",
            Command::Reach => "reach",
            Command::Invert => "invert",
            Command::PlanCfk => "plan-cfk",
            Command::PlanCfm => "plan-cfm",
            Command::VerifyFacts => "verify-facts",
        }
    }

    /// Whether a `[planner] mode` value selects this subcommand.
    pub fn accepts_mode(self, mode: &str) -> bool {
        mode == self.name() || self.name().strip_prefix("plan-") == Some(mode)
    }
}

#[derive(Debug, Parser)]
#[command(name = TOOL, version, about = "Impulsive relative-motion planning on the Clohessy-Wiltshire model")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Free drift from (r, v), or a two-impulse leg when r_j is given.
    Propagate(RunArgs),
    /// Sphere, cone and multi-impulse bounds; optional bound-vs-sample sweep.
    Bound(RunArgs),
    /// Reachable surface and curves, boundary clearance, time-window exclusion.
    Reach(RunArgs),
    /// Locate (t, dt) for a target position on the reachable surface.
    Invert(RunArgs),
    /// Circular formation keeping feasibility map.
    PlanCfk(RunArgs),
    /// Collision-free maneuver certification of an impulse tour.
    PlanCfm(RunArgs),
    /// Numeric checks of the spectral properties of the transfer matrices.
    VerifyFacts(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a scenario value, e.g. `--set planner.dt=600`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl CliCommand {
    fn split(self) -> (Command, RunArgs) {
        match self {
            CliCommand::Propagate(a) => (Command::Propagate, a),
            CliCommand::Bound(a) => (Command::Bound, a),
            CliCommand::Reach(a) => (Command::Reach, a),
            CliCommand::Invert(a) => (Command::Invert, a),
            CliCommand::PlanCfk(a) => (Command::PlanCfk, a),
            CliCommand::PlanCfm(a) => (Command::PlanCfm, a),
            CliCommand::VerifyFacts(a) => (Command::VerifyFacts, a),
        }
    }
}

/// What a finished run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
    /// `None` when the result is certified or feasible, otherwise the reason.
    pub uncertified: Option<String>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.uncertified.is_some() { 3 } else { 0 }
    }
}

/// Worker count from `CWPATH_THREADS`; `None` leaves the choice to rayon.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Validation(format!("{THREADS_VAR} must be a positive integer, got \"{s}\""))),
        },
    }
}

/// Loads the scenario, computes on a dedicated pool, then writes all files
/// from this thread.
pub fn run(command: Command, scenario_path: &Path, out: Option<&Path>, overrides: &[String]) -> Result<RunReport, CliError> {
    let (scenario, text) = ScenarioFile::load(scenario_path, overrides)?;
    if let Some(mode) = &scenario.planner.mode {
        if !command.accepts_mode(mode) {
            return Err(CliError::Validation(format!(
                "scenario planner mode \"{mode}\" does not match subcommand {}",
                command.name()
            )));
        }
    }
    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| scenario.output_dir().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads_from_env()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| commands::execute(command, &scenario))?;

    let mut parameters: BTreeMap<String, String> = outcome.parameters;
    parameters.insert("overrides".into(), overrides.join(" "));
    let manifest = RunManifest {
        tool: TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: command.name().into(),
        scenario: scenario_path.display().to_string(),
        scenario_sha256: output::sha256_hex(text.as_bytes()),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        threads: pool.current_num_threads(),
        status: outcome.uncertified.as_deref().map_or("ok".into(), |_| "uncertified".into()),
        parameters,
        tolerances: outcome.tolerances,
        files: Vec::new(),
    };
    let manifest = output::write_outputs(&out_dir, &outcome.datasets, manifest)?;
    Ok(RunReport { out_dir, manifest, uncertified: outcome.uncertified })
}

/// Parses arguments, runs, prints diagnostics to stderr and returns the exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (command, args) = cli.command.split();
    match run(command, &args.scenario, args.out.as_deref(), &args.set) {
        Ok(report) => {
            if let Some(reason) = &report.uncertified {
                eprintln!("{TOOL} {}: {reason}", command.name());
            }
            println!("{}", report.out_dir.join(MANIFEST_NAME).display());
            report.exit_code()
        }
        Err(e) => {
            let class = match e.exit_code() {
                3 => "result",
                2 => "validation",
                _ => "io",
            };
            eprintln!("{TOOL} {}: {class} error: {e}", command.name());
            e.exit_code()
        }
    }
}
