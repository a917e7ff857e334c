mod commands;
mod output;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Curvature, stratum labels and orbit-Einstein flows on homogeneous spaces.
#[derive(Debug, Parser)]
#[command(name = "homflow", version)]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Numerical tolerance: moment-flow criticality for `beta`, ODE symmetry
    /// tolerance for `flow`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Directory for output files (stdout when absent).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural report for an algebra or homogeneous space.
    Analyze {
        /// Catalog name or entry file.
        entry: String,
    },
    /// Estimate (or load) the stratum label and verify it.
    Beta {
        entry: String,
        /// Label file in the algebra basis; skips the moment flow.
        #[arg(long)]
        beta: Option<PathBuf>,
        /// Number of q-samples for the Ricci estimate.
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Integrate a cohomogeneity-one scenario and audit the trajectory.
    Flow {
        scenario: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        #[arg(long)]
        beta: Option<PathBuf>,
    },
    /// Run the invariant suites over the catalog and seeded random inputs.
    Verify {
        /// Run a single suite.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(suites::NAMES))]
        only: Option<String>,
        /// Random samples per entry for the sampling suites.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Inspect the built-in catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    List,
    Show { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            let code = commands::exit_code(&err);
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
