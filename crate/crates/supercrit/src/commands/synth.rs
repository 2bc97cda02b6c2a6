//! `synth`: emit an analytic field specification, optionally sampled onto a
//! cell-centred grid.

use std::path::PathBuf;

use supercrit_core::field::{sample_to_grid, Field};

use crate::config::{parse_rows, ConfigMap, Resolver};
use crate::formats::{self, FieldFile};
use crate::CliError;

/// Arguments of the `synth` subcommand.
#[derive(Debug, clap::Args)]
pub struct SynthArgs {
    /// Ambient dimension.
    #[arg(long)]
    pub n: Option<usize>,

    /// Nonlinearity exponent.
    #[arg(long)]
    pub p: Option<f64>,

    /// Spine dimension (0 for a point singularity).
    #[arg(long)]
    pub m: Option<usize>,

    /// Comma-separated spine point (defaults to the origin).
    #[arg(long)]
    pub center: Option<String>,

    /// Semicolon-separated spine rows, each a comma-separated vector
    /// (defaults to the first m coordinate axes).
    #[arg(long)]
    pub frame: Option<String>,

    /// Emit the identically-zero field instead of the singular model.
    #[arg(long)]
    pub zero: bool,

    /// Sample onto a grid: comma-separated box corner.
    #[arg(long)]
    pub sample_origin: Option<String>,

    /// Sample onto a grid: cell edge length.
    #[arg(long)]
    pub sample_spacing: Option<f64>,

    /// Sample onto a grid: comma-separated cells per axis.
    #[arg(long)]
    pub sample_shape: Option<String>,

    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Default frame: the first `m` coordinate axes of `R^n`.
fn axis_frame(n: usize, m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|i| {
            let mut row = vec![0.0; n];
            if i < n {
                row[i] = 1.0;
            }
            row
        })
        .collect()
}

/// Runs `synth`.
pub fn run(args: &SynthArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    let mut res = Resolver::new(cfg);
    let n = res.scalar("n", args.n, 5usize)?;
    let p = res.scalar("p", args.p, 2.5f64)?;
    let m = res.scalar("m", args.m, 0usize)?;
    let zero = res.scalar("zero", args.zero.then_some(true), false)?;
    let center = res.vector("center", args.center.clone(), &vec![0.0; n])?;
    let frame_text = res.optional("frame", args.frame.clone())?;
    let frame = match frame_text {
        Some(text) => parse_rows("frame", &text)?,
        None => axis_frame(n, m),
    };
    let out = res.optional::<String>("out", args.out.clone().map(pathbuf_to_string))?;

    let spec = if zero {
        FieldFile::Analytic(formats::AnalyticSpec::Zero { n, p })
    } else {
        FieldFile::Analytic(formats::AnalyticSpec::PowerLaw {
            n,
            p,
            m,
            center,
            frame,
            c0: None,
        })
    };
    // Round-trip through the runtime field: validates every constraint and
    // fills in the derived normalizing constant.
    let field = spec.to_field()?;
    let emitted = FieldFile::from_field(&field)?;

    let sample_keys = [
        args.sample_origin.is_some() || cfg.get("sample-origin").is_some(),
        args.sample_spacing.is_some() || cfg.get("sample-spacing").is_some(),
        args.sample_shape.is_some() || cfg.get("sample-shape").is_some(),
    ];
    let final_file = if sample_keys.iter().any(|b| *b) {
        if !sample_keys.iter().all(|b| *b) {
            return Err(CliError::validation(
                "grid sampling needs sample-origin, sample-spacing, and sample-shape together",
            ));
        }
        let origin = res.vector("sample-origin", args.sample_origin.clone(), &[])?;
        let spacing = res.scalar("sample-spacing", args.sample_spacing, 0.0f64)?;
        let shape_text = res
            .optional("sample-shape", args.sample_shape.clone())?
            .expect("presence checked above");
        let shape = parse_shape(&shape_text)?;
        let analytic = match &field {
            Field::Analytic(a) => a,
            Field::Grid(_) => unreachable!("synth only builds analytic fields"),
        };
        let grid = sample_to_grid(analytic, origin, spacing, shape)
            .map_err(CliError::from_core)?;
        FieldFile::from_field(&Field::Grid(grid))?
    } else {
        emitted
    };

    let text = formats::to_json_string(&final_file)?;
    formats::emit(out.as_deref().map(std::path::Path::new), &text)
}

fn pathbuf_to_string(p: PathBuf) -> String {
    p.to_string_lossy().into_owned()
}

/// Parses a comma-separated list of cell counts.
fn parse_shape(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim().parse::<usize>().map_err(|_| {
                CliError::validation(format!(
                    "`sample-shape`: cannot parse `{part}` as a cell count"
                ))
            })
        })
        .collect()
}
