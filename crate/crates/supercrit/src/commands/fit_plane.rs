//! `fit-plane`: best affine subspace and displacement for a measure file.

use std::path::PathBuf;

use supercrit_core::subspace::{displacement, moment_spectrum};

use crate::config::{ConfigMap, Resolver};
use crate::formats::{self, FitPlaneJson, SubspaceJson};
use crate::CliError;

/// Arguments of the `fit-plane` subcommand.
#[derive(Debug, clap::Args)]
pub struct FitPlaneArgs {
    /// Measure file (`{"points": [[…]], "weights": […]}`).
    #[arg(long)]
    pub measure: Option<PathBuf>,

    /// Comma-separated probe centre (defaults to the origin).
    #[arg(long)]
    pub x: Option<String>,

    /// Probe scale.
    #[arg(long)]
    pub r: Option<f64>,

    /// Subspace dimension.
    #[arg(long)]
    pub k: Option<usize>,

    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs `fit-plane`.
pub fn run(args: &FitPlaneArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    let mut res = Resolver::new(cfg);
    let measure_path = res
        .optional::<String>(
            "measure",
            args.measure.clone().map(|p| p.display().to_string()),
        )?
        .ok_or_else(|| CliError::validation("a measure file is required (--measure)"))?;
    let mu = formats::load_measure(std::path::Path::new(&measure_path))?;
    let x = res.vector("x", args.x.clone(), &vec![0.0; mu.dim()])?;
    let r = res.scalar("r", args.r, 1.0f64)?;
    let k = res.scalar("k", args.k, 1usize)?;
    let out = res.optional::<String>("out", args.out.clone().map(|p| p.display().to_string()))?;

    let (value, minimizer) = displacement(&mu, &x, r, k).map_err(CliError::from_core)?;
    let spectrum = moment_spectrum(&mu, &x, r).map_err(CliError::from_core)?;
    let eigen_residual = spectrum
        .max_eigen_residual(&mu, &x, r)
        .map_err(CliError::from_core)?;

    let report = FitPlaneJson {
        config: res.into_echo(),
        x,
        r,
        k,
        displacement: value,
        minimizer: SubspaceJson::from_subspace(&minimizer),
        x_cm: spectrum.x_cm().to_vec(),
        eigenvalues: spectrum.eigenvalues().to_vec(),
        eigen_residual,
    };
    let json = formats::to_json_string(&report)?;
    formats::emit(out.as_deref().map(std::path::Path::new), &json)
}
