//! Command-line front end for the stratification toolkit: argument parsing,
//! flat key-value configuration, JSON/CSV artifact formats, and the
//! subcommand implementations.
//!
//! The binary exposes seven subcommands — `synth`, `density-scan`, `strata`,
//! `fit-plane`, `reifenberg`, `cover`, and `tail` — each a thin orchestration
//! layer over [`supercrit_core`].  Exit codes: `0` on success, `2` on
//! validation errors (bad flags, malformed files, parameter constraints),
//! `3` on numerical guards (non-termination, too-coarse resolution).  Every
//! error is emitted as machine-readable JSON on stderr.

#![deny(unsafe_code)]
#![warn(missing_docs)]

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod formats;

use config::ConfigMap;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// A command failure with its exit-code class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad input: flags, files, or parameter constraints (exit 2).
    Validation(String),
    /// A numerical guard tripped: the computation refused to continue
    /// rather than return untrustworthy values (exit 3).
    Numerical(String),
}

impl CliError {
    /// Builds a validation error.
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    /// Builds a numerical-guard error.
    pub fn numerical(msg: impl Into<String>) -> Self {
        CliError::Numerical(msg.into())
    }

    /// Classifies a library error: resolution and termination guards are
    /// numerical; everything else rejects the input.
    #[must_use]
    pub fn from_core(e: supercrit_core::Error) -> Self {
        match e {
            supercrit_core::Error::NonTermination { .. }
            | supercrit_core::Error::ResolutionTooCoarse { .. } => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }

    /// Process exit code for this failure.
    #[must_use]
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    /// Machine-readable stderr form.
    #[must_use]
    pub fn to_json(&self) -> String {
        let (kind, msg) = match self {
            CliError::Validation(m) => ("validation", m),
            CliError::Numerical(m) => ("numerical", m),
        };
        let mut map = serde_json::Map::new();
        map.insert("kind".into(), serde_json::Value::String(kind.into()));
        map.insert("error".into(), serde_json::Value::String(msg.clone()));
        serde_json::Value::Object(map).to_string()
    }
}

// ---------------------------------------------------------------------------
// Argument grammar
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "supercrit",
    version,
    about = "Quantitative stratification toolkit for supercritical semilinear elliptic fields",
    color = clap::ColorChoice::Never
)]
struct Cli {
    /// Flat `key = value` config file; flags win on conflict.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit an analytic field spec, optionally sampled onto a grid.
    Synth(commands::synth::SynthArgs),
    /// Scan the energy densities and monotonicity gap over a scale ladder.
    DensityScan(commands::density_scan::DensityScanArgs),
    /// Classify points into quantitative strata.
    Strata(commands::strata::StrataArgs),
    /// Fit the best affine subspace to a weighted point cloud.
    FitPlane(commands::fit_plane::FitPlaneArgs),
    /// Check the discrete packing hypothesis for a measure.
    Reifenberg(commands::reifenberg::ReifenbergArgs),
    /// Build the good/bad-ball covering tree.
    Cover(commands::cover::CoverArgs),
    /// Measure superlevel tails and fit the decay exponent.
    Tail(commands::tail::TailArgs),
}

/// Parses `argv`, runs the selected subcommand, and returns the process
/// exit code; errors are printed as JSON on stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) =>
        {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let err = CliError::validation(e.render().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    let outcome = ConfigMap::load(cli.config.as_deref()).and_then(|cfg| match &cli.command {
        Command::Synth(args) => commands::synth::run(args, &cfg),
        Command::DensityScan(args) => commands::density_scan::run(args, &cfg),
        Command::Strata(args) => commands::strata::run(args, &cfg),
        Command::FitPlane(args) => commands::fit_plane::run(args, &cfg),
        Command::Reifenberg(args) => commands::reifenberg::run(args, &cfg),
        Command::Cover(args) => commands::cover::run(args, &cfg),
        Command::Tail(args) => commands::tail::run(args, &cfg),
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
