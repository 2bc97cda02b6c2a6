//! `strata`: classify points into quantitative strata.
//!
//! Points are independent of one another in the classification, so the
//! input splits into fixed-size chunks processed on a rayon pool whose
//! width is capped by the `STRATA_THREADS` environment variable.  Chunk
//! boundaries and the merge order are fixed, so the artifact bytes never
//! depend on the thread count.

use std::path::PathBuf;

use rayon::prelude::*;

use supercrit_core::symmetry::{StrataConfig, StrataReport};

use crate::commands::{quadrature_policy, stem_paths};
use crate::config::{ConfigMap, Resolver};
use crate::formats::{self, StrataJson};
use crate::CliError;

/// Points per parallel chunk; fixed so results never depend on the pool.
const CHUNK_ROWS: usize = 8;

/// Arguments of the `strata` subcommand.
#[derive(Debug, clap::Args)]
pub struct StrataArgs {
    /// Field file (analytic spec or sampled grid).
    #[arg(long)]
    pub field: Option<PathBuf>,

    /// Points file (`{"points": [[…]]}`).
    #[arg(long)]
    pub points: Option<PathBuf>,

    /// Symmetry threshold.
    #[arg(long)]
    pub eps: Option<f64>,

    /// Smallest dyadic scale.
    #[arg(long)]
    pub r_min: Option<f64>,

    /// Probe frame dimension (defaults to the parameter threshold).
    #[arg(long)]
    pub probe_k: Option<usize>,

    /// Derivative order of the regularity scales.
    #[arg(long)]
    pub reg_order: Option<usize>,

    /// Quadrature preset: standard, coarse, or doubled.
    #[arg(long)]
    pub quadrature: Option<String>,

    /// Output stem: writes <stem>.json and <stem>.csv (stdout JSON when
    /// omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs `strata`.
pub fn run(args: &StrataArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    let mut res = Resolver::new(cfg);
    let field_path = res
        .optional::<String>("field", args.field.clone().map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::validation("a field file is required (--field)"))?;
    let points_path = res
        .optional::<String>("points", args.points.clone().map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::validation("a points file is required (--points)"))?;
    let eps = res.scalar("eps", args.eps, 1e-2f64)?;
    let r_min = res.scalar("r-min", args.r_min, 0.05f64)?;
    let probe_k = res.optional("probe-k", args.probe_k)?;
    let reg_order = res.scalar("reg-order", args.reg_order, 1usize)?;
    let quad = res.scalar("quadrature", args.quadrature.clone(), "standard".to_string())?;
    let out = res.optional::<String>("out", args.out.clone().map(|p| p.display().to_string()))?;

    let u = formats::load_field(std::path::Path::new(&field_path))?;
    let mu = formats::load_measure(std::path::Path::new(&points_path))?;
    if mu.dim() != u.dim() {
        return Err(CliError::validation(format!(
            "points have dimension {}, field has dimension {}",
            mu.dim(),
            u.dim()
        )));
    }
    let strata_cfg = StrataConfig {
        eps,
        r_min,
        probe_k,
        reg_order,
        policy: quadrature_policy(&quad)?,
    };

    let chunks: Vec<&[f64]> = mu.points().chunks(CHUNK_ROWS * u.dim()).collect();
    let pool = build_pool()?;
    let results: Vec<Result<StrataReport, supercrit_core::Error>> = pool.install(|| {
        chunks
            .par_iter()
            .map(|chunk| StrataReport::compute(&u, chunk, &strata_cfg))
            .collect()
    });
    let mut reports = Vec::with_capacity(results.len());
    for r in results {
        reports.push(r.map_err(CliError::from_core)?);
    }

    let report = StrataJson::from_reports(&reports, res.into_echo())?;
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

/// Builds the worker pool, honouring `STRATA_THREADS` when set.
fn build_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("STRATA_THREADS") {
        let threads: usize = raw.parse().map_err(|_| {
            CliError::validation(format!(
                "STRATA_THREADS: cannot parse `{raw}` as a thread count"
            ))
        })?;
        builder = builder.num_threads(threads.max(1));
    }
    builder
        .build()
        .map_err(|e| CliError::validation(format!("cannot build worker pool: {e}")))
}
