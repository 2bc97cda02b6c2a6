//! `reifenberg`: discrete packing-hypothesis check for a measure file.

use std::path::PathBuf;

use supercrit_core::reifenberg::reifenberg_check;

use crate::config::{ConfigMap, Resolver};
use crate::formats::{self, PackingJson};
use crate::CliError;

/// Arguments of the `reifenberg` subcommand.
#[derive(Debug, clap::Args)]
pub struct ReifenbergArgs {
    /// Measure file (`{"points": [[…]], "weights": […]}`).
    #[arg(long)]
    pub measure: Option<PathBuf>,

    /// Plane dimension the packing is measured against.
    #[arg(long)]
    pub k: Option<usize>,

    /// Comma-separated packing centre (defaults to the origin).
    #[arg(long)]
    pub x0: Option<String>,

    /// Top scale.
    #[arg(long)]
    pub r: Option<f64>,

    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs `reifenberg`.
pub fn run(args: &ReifenbergArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    let mut res = Resolver::new(cfg);
    let measure_path = res
        .optional::<String>(
            "measure",
            args.measure.clone().map(|p| p.display().to_string()),
        )?
        .ok_or_else(|| CliError::validation("a measure file is required (--measure)"))?;
    let mu = formats::load_measure(std::path::Path::new(&measure_path))?;
    let k = res.scalar("k", args.k, 1usize)?;
    let x0 = res.vector("x0", args.x0.clone(), &vec![0.0; mu.dim()])?;
    let r = res.scalar("r", args.r, 1.0f64)?;
    let out = res.optional::<String>("out", args.out.clone().map(|p| p.display().to_string()))?;

    let rep = reifenberg_check(&mu, k, &x0, r).map_err(CliError::from_core)?;
    let report = PackingJson::from_report(&rep, res.into_echo());
    let json = formats::to_json_string(&report)?;
    formats::emit(out.as_deref().map(std::path::Path::new), &json)
}
