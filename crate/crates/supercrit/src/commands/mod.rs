//! Subcommand implementations.
//!
//! Every command follows the same shape: resolve each parameter through
//! [`crate::config::Resolver`] (flag, then config file, then default),
//! load input files through [`crate::formats`], call the library, and emit
//! JSON/CSV artifacts with the resolved configuration echoed inside.

use std::path::{Path, PathBuf};

use supercrit_core::density::QuadraturePolicy;

use crate::CliError;

pub mod cover;
pub mod density_scan;
pub mod fit_plane;
pub mod reifenberg;
pub mod strata;
pub mod synth;
pub mod tail;

/// Maps a quadrature preset name to its policy.
pub(crate) fn quadrature_policy(name: &str) -> Result<QuadraturePolicy, CliError> {
    match name {
        "standard" => Ok(QuadraturePolicy::default()),
        "coarse" => Ok(QuadraturePolicy::coarse()),
        "doubled" => Ok(QuadraturePolicy::default().doubled()),
        other => Err(CliError::validation(format!(
            "unknown quadrature preset `{other}` (expected standard, coarse, or doubled)"
        ))),
    }
}

/// Geometric ladder of `count >= 2` strictly increasing positive values.
pub(crate) fn geometric_ladder(
    lo: f64,
    hi: f64,
    count: usize,
    what: &str,
) -> Result<Vec<f64>, CliError> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
        return Err(CliError::validation(format!(
            "{what}: need 0 < min < max, got [{lo}, {hi}]"
        )));
    }
    if count < 2 {
        return Err(CliError::validation(format!(
            "{what}: need at least 2 ladder points"
        )));
    }
    let ratio = hi / lo;
    Ok((0..count)
        .map(|i| lo * ratio.powf(i as f64 / (count - 1) as f64))
        .collect())
}

/// `<stem>.json` and `<stem>.csv` paths for a two-file artifact.
pub(crate) fn stem_paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("csv"))
}
