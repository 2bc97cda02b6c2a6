//! `tail`: superlevel-set measures of `|D^j u|` on a voxel grid, with a
//! fitted log-log decay exponent.

use std::path::PathBuf;

use supercrit_core::volume::tail_distribution;

use crate::commands::{geometric_ladder, stem_paths};
use crate::config::{ConfigMap, Resolver};
use crate::formats::{self, TailJson};
use crate::CliError;

/// Arguments of the `tail` subcommand.
#[derive(Debug, clap::Args)]
pub struct TailArgs {
    /// Field file (analytic spec or sampled grid).
    #[arg(long)]
    pub field: Option<PathBuf>,

    /// Derivative order (0 for values, 1 for gradient magnitudes).
    #[arg(long)]
    pub j: Option<usize>,

    /// Smallest threshold.
    #[arg(long)]
    pub lambda_min: Option<f64>,

    /// Largest threshold.
    #[arg(long)]
    pub lambda_max: Option<f64>,

    /// Number of thresholds (geometric ladder).
    #[arg(long)]
    pub count: Option<usize>,

    /// Comma-separated ball centre (defaults to the origin).
    #[arg(long)]
    pub center: Option<String>,

    /// Ball radius.
    #[arg(long)]
    pub radius: Option<f64>,

    /// Voxel edge length (defaults to radius/16).
    #[arg(long)]
    pub resolution: Option<f64>,

    /// Output stem: writes <stem>.json and <stem>.csv (stdout JSON when
    /// omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs `tail`.
pub fn run(args: &TailArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    let mut res = Resolver::new(cfg);
    let field_path = res
        .optional::<String>("field", args.field.clone().map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::validation("a field file is required (--field)"))?;
    let u = formats::load_field(std::path::Path::new(&field_path))?;
    let j = res.scalar("j", args.j, 0usize)?;
    let lambda_min = res.scalar("lambda-min", args.lambda_min, 1.0f64)?;
    let lambda_max = res.scalar("lambda-max", args.lambda_max, 100.0f64)?;
    let count = res.scalar("count", args.count, 16usize)?;
    let center = res.vector("center", args.center.clone(), &vec![0.0; u.dim()])?;
    let radius = res.scalar("radius", args.radius, 1.0f64)?;
    let resolution = res.scalar("resolution", args.resolution, radius / 16.0)?;
    let out = res.optional::<String>("out", args.out.clone().map(|p| p.display().to_string()))?;

    let lambda = geometric_ladder(lambda_min, lambda_max, count, "threshold ladder")?;
    let rep = tail_distribution(&u, j, &lambda, &center, radius, resolution)
        .map_err(CliError::from_core)?;
    let report = TailJson::from_report(&rep, j, &center, radius, resolution, res.into_echo());
    let json = formats::to_json_string(&report)?;
    match out {
        Some(stem) => {
            let (json_path, csv_path) = stem_paths(std::path::Path::new(&stem));
            formats::emit(Some(&json_path), &json)?;
            formats::emit(Some(&csv_path), &report.to_csv())
        }
        None => formats::emit(None, &json),
    }
}
