//! Command-line front end for the relaxation solver.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{CommonArgs, Extras, RunConfig, ScenarioKind};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "cnls", version, about = "Relaxation Crank-Nicolson solver for the cubic NLS on 2D meshes")]
pub struct Cli {
    /// Worker threads for assembly (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a preset's mesh and write it as .msh (or dump for other extensions).
    MeshGen {
        #[command(flatten)]
        common: CommonArgs,
        /// Target element size instead of a triangle count.
        #[arg(long, conflicts_with = "triangles")]
        h: Option<f64>,
    },
    /// Integrate a preset and write diagnostics, snapshots and the final state.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated snapshot times (default: 0 and the final time).
        #[arg(long)]
        snapshots: Option<String>,
        /// Also write legacy VTK snapshots.
        #[arg(long)]
        vtk: bool,
        /// Record diagnostics every this many steps.
        #[arg(long)]
        cadence: Option<usize>,
    },
    /// Temporal convergence study over a ladder of time steps.
    EocTime {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated time steps.
        #[arg(long)]
        ladder: Option<String>,
        #[arg(long, value_enum)]
        scenario: Option<ScenarioKind>,
    },
    /// Spatial convergence study over a ladder of triangle counts.
    EocSpace {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated triangle counts.
        #[arg(long)]
        ladder: Option<String>,
        #[arg(long, value_enum)]
        scenario: Option<ScenarioKind>,
    },
    /// Sample a saved state along a horizontal line.
    Probe {
        /// State file written by `run`.
        state: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        y0: f64,
        #[arg(long, default_value_t = 401)]
        samples: usize,
        #[arg(long, allow_hyphen_values = true, requires = "x_max")]
        x_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "x_min")]
        x_max: Option<f64>,
        /// Output CSV (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
        /// State whose mirrored profile the probe is compared with.
        #[arg(long)]
        mirror_of: Option<PathBuf>,
        /// Background modulus subtracted before the comparison.
        #[arg(long, default_value_t = 0.0)]
        background: f64,
    },
}

/// Runs the parsed command; the error carries the exit code.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        // A second initialisation in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::MeshGen { common, h } => {
            let cfg = RunConfig::resolve(&common, &Extras::default(), None)?;
            if h.is_some() && common.mesh.is_some() {
                return Err(CliError::Config("--h cannot be combined with --mesh".into()));
            }
            commands::mesh_gen(&cfg, h).map(|_| ())
        }
        Command::Run { common, snapshots, vtk, cadence } => {
            let extras = Extras { snapshots, vtk, cadence, ..Extras::default() };
            commands::run(&RunConfig::resolve(&common, &extras, None)?).map(|_| ())
        }
        Command::EocTime { common, ladder, scenario } => {
            let extras = Extras { ladder, scenario, ..Extras::default() };
            commands::eoc_time(&RunConfig::resolve(&common, &extras, Some("temporal-eoc"))?).map(|_| ())
        }
        Command::EocSpace { common, ladder, scenario } => {
            let extras = Extras { ladder, scenario, ..Extras::default() };
            commands::eoc_space(&RunConfig::resolve(&common, &extras, Some("spatial-eoc"))?).map(|_| ())
        }
        Command::Probe { state, y0, samples, x_min, x_max, out, mirror_of, background } => {
            let args = commands::ProbeArgs {
                state,
                y0,
                samples,
                x_range: x_min.zip(x_max),
                out,
                mirror_of,
                background,
            };
            commands::probe(&args).map(|_| ())
        }
    }
}
