//! `density-scan`: evaluate both energy densities and the two-scale
//! monotonicity gap over a geometric scale ladder.

use std::path::PathBuf;

use supercrit_core::density::DensityScan;

use crate::commands::{geometric_ladder, quadrature_policy, stem_paths};
use crate::config::{ConfigMap, Resolver};
use crate::formats::{self, DensityScanJson};
use crate::CliError;

/// Arguments of the `density-scan` subcommand.
#[derive(Debug, clap::Args)]
pub struct DensityScanArgs {
    /// Field file (analytic spec or sampled grid).
    #[arg(long)]
    pub field: Option<PathBuf>,

    /// Comma-separated scan centre (defaults to the origin).
    #[arg(long)]
    pub center: Option<String>,

    /// Smallest scale of the ladder.
    #[arg(long)]
    pub r_min: Option<f64>,

    /// Largest scale of the ladder.
    #[arg(long)]
    pub r_max: Option<f64>,

    /// Number of ladder scales.
    #[arg(long)]
    pub count: Option<usize>,

    /// Quadrature preset: standard, coarse, or doubled.
    #[arg(long)]
    pub quadrature: Option<String>,

    /// Output stem: writes <stem>.json and <stem>.csv (stdout JSON when
    /// omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs `density-scan`.
pub fn run(args: &DensityScanArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    let mut res = Resolver::new(cfg);
    let field_path = res
        .optional::<String>("field", args.field.clone().map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::validation("a field file is required (--field)"))?;
    let u = formats::load_field(std::path::Path::new(&field_path))?;
    let center = res.vector("center", args.center.clone(), &vec![0.0; u.dim()])?;
    let r_min = res.scalar("r-min", args.r_min, 0.05f64)?;
    let r_max = res.scalar("r-max", args.r_max, 0.4f64)?;
    let count = res.scalar("count", args.count, 15usize)?;
    let quad = res.scalar("quadrature", args.quadrature.clone(), "standard".to_string())?;
    let out = res.optional::<String>("out", args.out.clone().map(|p| p.display().to_string()))?;

    let policy = quadrature_policy(&quad)?;
    let radii = geometric_ladder(r_min, r_max, count, "scale ladder")?;
    let scan =
        DensityScan::compute(&u, &center, &radii, &policy).map_err(CliError::from_core)?;
    let report = DensityScanJson::from_scan(&scan, res.into_echo());
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
