//! `cover`: build the good/bad-ball covering tree for a field.

use std::path::PathBuf;

use supercrit_core::covering::{build_cover_with, CoverConfig};

use crate::commands::quadrature_policy;
use crate::config::{ConfigMap, Resolver};
use crate::formats::{self, CoverJson};
use crate::CliError;

/// Arguments of the `cover` subcommand.
#[derive(Debug, clap::Args)]
pub struct CoverArgs {
    /// Field file (analytic spec or sampled grid).
    #[arg(long)]
    pub field: Option<PathBuf>,

    /// Stratum dimension the cover tracks.
    #[arg(long)]
    pub k: Option<usize>,

    /// Symmetry threshold.
    #[arg(long)]
    pub eps: Option<f64>,

    /// Terminal ball radius.
    #[arg(long)]
    pub r: Option<f64>,

    /// Top ball radius.
    #[arg(long)]
    pub big_r: Option<f64>,

    /// Refinement ratio.
    #[arg(long)]
    pub rho: Option<f64>,

    /// Pinch-set energy margin (defaults to eps/4).
    #[arg(long)]
    pub delta: Option<f64>,

    /// Stratum-detection threshold (defaults to eps/4).
    #[arg(long)]
    pub xi: Option<f64>,

    /// Multiplier on the default sample count.
    #[arg(long)]
    pub sample_scale: Option<f64>,

    /// Comma-separated top-ball centre (defaults to the origin).
    #[arg(long)]
    pub x0: Option<String>,

    /// Quadrature preset: standard, coarse, or doubled.
    #[arg(long)]
    pub quadrature: Option<String>,

    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs `cover`.
pub fn run(args: &CoverArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    let mut res = Resolver::new(cfg);
    let field_path = res
        .optional::<String>("field", args.field.clone().map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::validation("a field file is required (--field)"))?;
    let u = formats::load_field(std::path::Path::new(&field_path))?;
    let k = res.scalar("k", args.k, 1usize)?;
    let eps = res.scalar("eps", args.eps, 1e-2f64)?;
    let r = res.scalar("r", args.r, 0.05f64)?;
    let big_r = res.scalar("big-r", args.big_r, 0.5f64)?;
    let rho = res.scalar("rho", args.rho, 1.0 / 128.0)?;
    let delta = res.scalar("delta", args.delta, eps / 4.0)?;
    let xi = res.scalar("xi", args.xi, eps / 4.0)?;
    let sample_scale = res.scalar("sample-scale", args.sample_scale, 1.0f64)?;
    let x0 = res.vector("x0", args.x0.clone(), &vec![0.0; u.dim()])?;
    let quad = res.scalar("quadrature", args.quadrature.clone(), "coarse".to_string())?;
    let out = res.optional::<String>("out", args.out.clone().map(|p| p.display().to_string()))?;

    let mut cover_cfg = CoverConfig::new(k, eps, r, big_r);
    cover_cfg.rho = rho;
    cover_cfg.delta = delta;
    cover_cfg.xi = xi;
    cover_cfg.sample_scale = sample_scale;
    cover_cfg.policy = quadrature_policy(&quad)?;

    let tree = build_cover_with(&u, &cover_cfg, &x0).map_err(CliError::from_core)?;
    let report = CoverJson::from_tree(&tree, u.dim(), res.into_echo());
    let json = formats::to_json_string(&report)?;
    formats::emit(out.as_deref().map(std::path::Path::new), &json)
}
