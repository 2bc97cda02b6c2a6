//! On-disk formats: field specifications, discrete measures, and the JSON/CSV
//! report shapes emitted by the subcommands.
//!
//! Field files come in two schemas distinguished by the presence of a
//! `"kind"` tag:
//!
//! * analytic — `{"kind":"power_law","n":…,"p":…,"m":…,"center":[…],
//!   "frame":[[…]]}` (an informational `"c0"` is emitted and, when present
//!   on ingestion, validated against the derived constant) or
//!   `{"kind":"zero","n":…,"p":…}`;
//! * grid — `{"n":…,"p":…,"origin":[…],"spacing":…,"shape":[…],
//!   "values":[…],"capped_cells":[…]}` with row-major values.
//!
//! Measures are `{"points":[[…]],"weights":[…]}`; an absent or empty weight
//! array means unit weights.  Reports embed the fully resolved run
//! configuration under `"config"` so every artifact records the defaults it
//! was produced with.  All serialization goes through `serde_json` with
//! fixed field order and shortest-roundtrip floats, so identical inputs
//! yield byte-identical artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use supercrit_core::covering::{BallLabel, BallNode, CoverTree};
use supercrit_core::density::DensityScan;
use supercrit_core::field::{
    make_singular_solution, AnalyticField, Field, GridField,
};
use supercrit_core::measure::DiscreteMeasure;
use supercrit_core::params::ProblemParams;
use supercrit_core::reifenberg::PackingReport;
use supercrit_core::subspace::AffineSubspace;
use supercrit_core::symmetry::{Membership, StrataReport};
use supercrit_core::volume::TailReport;

use crate::CliError;

/// Resolved configuration echoed into every report.
pub type ConfigEcho = BTreeMap<String, String>;

// ---------------------------------------------------------------------------
// Field files
// ---------------------------------------------------------------------------

/// Closed-form field specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum AnalyticSpec {
    /// Singular model solution with an `m`-dimensional spine.
    #[serde(rename = "power_law")]
    PowerLaw {
        /// Ambient dimension.
        n: usize,
        /// Nonlinearity exponent.
        p: f64,
        /// Spine dimension.
        m: usize,
        /// A point on the spine.
        center: Vec<f64>,
        /// Orthonormal spine directions, one row per dimension.
        frame: Vec<Vec<f64>>,
        /// Normalizing constant; informational on output, validated when
        /// present on input.
        #[serde(skip_serializing_if = "Option::is_none")]
        c0: Option<f64>,
    },
    /// The identically-zero field (a trivial solution).
    #[serde(rename = "zero")]
    Zero {
        /// Ambient dimension.
        n: usize,
        /// Nonlinearity exponent.
        p: f64,
    },
}

/// Grid-sampled field file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    /// Ambient dimension.
    pub n: usize,
    /// Nonlinearity exponent.
    pub p: f64,
    /// Box corner.
    pub origin: Vec<f64>,
    /// Common cell edge length.
    pub spacing: f64,
    /// Cells per axis.
    pub shape: Vec<usize>,
    /// Cell-centre values, row-major (last axis fastest).
    pub values: Vec<f64>,
    /// Sorted flat indices of capped cells.
    pub capped_cells: Vec<usize>,
}

/// A field file: analytic (tagged by `"kind"`) or grid (untagged).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldFile {
    /// Closed-form specification.
    Analytic(AnalyticSpec),
    /// Sampled grid.
    Grid(GridSpec),
}

impl FieldFile {
    /// Builds the runtime field, revalidating every constraint.
    pub fn to_field(&self) -> Result<Field, CliError> {
        match self {
            FieldFile::Analytic(AnalyticSpec::PowerLaw {
                n,
                p,
                m,
                center,
                frame,
                c0,
            }) => {
                let params = ProblemParams::new(*n, *p).map_err(CliError::from_core)?;
                let flat: Vec<f64> = frame.iter().flatten().copied().collect();
                if frame.iter().any(|row| row.len() != *n) {
                    return Err(CliError::validation(
                        "every frame row must have n entries",
                    ));
                }
                let u = make_singular_solution(params, *m, center.clone(), flat)
                    .map_err(CliError::from_core)?;
                if let (Some(stated), AnalyticField::PowerLawSingular(f)) = (c0, &u) {
                    let derived = f.c0;
                    if (stated - derived).abs() > 1e-12 * derived.abs() {
                        return Err(CliError::validation(format!(
                            "stated c0 = {stated} disagrees with the derived \
                             constant {derived}"
                        )));
                    }
                }
                Ok(Field::Analytic(u))
            }
            FieldFile::Analytic(AnalyticSpec::Zero { n, p }) => {
                let params = ProblemParams::new(*n, *p).map_err(CliError::from_core)?;
                Ok(Field::Analytic(AnalyticField::Zero { params }))
            }
            FieldFile::Grid(g) => {
                let params = ProblemParams::new(g.n, g.p).map_err(CliError::from_core)?;
                let grid = GridField::new(
                    params,
                    g.origin.clone(),
                    g.spacing,
                    g.shape.clone(),
                    g.values.clone(),
                    g.capped_cells.clone(),
                )
                .map_err(CliError::from_core)?;
                Ok(Field::Grid(grid))
            }
        }
    }

    /// Captures a runtime field into its file form.
    pub fn from_field(u: &Field) -> Result<Self, CliError> {
        match u {
            Field::Analytic(AnalyticField::PowerLawSingular(f)) => {
                Ok(FieldFile::Analytic(AnalyticSpec::PowerLaw {
                    n: f.params.n(),
                    p: f.params.p(),
                    m: f.m,
                    center: f.center.clone(),
                    frame: f.frame.chunks(f.params.n()).map(<[f64]>::to_vec).collect(),
                    c0: Some(f.c0),
                }))
            }
            Field::Analytic(AnalyticField::Zero { params }) => {
                Ok(FieldFile::Analytic(AnalyticSpec::Zero {
                    n: params.n(),
                    p: params.p(),
                }))
            }
            Field::Analytic(_) => Err(CliError::validation(
                "only power-law and zero analytic fields have a file form",
            )),
            Field::Grid(g) => Ok(FieldFile::Grid(GridSpec {
                n: g.params.n(),
                p: g.params.p(),
                origin: g.origin.clone(),
                spacing: g.spacing,
                shape: g.shape.clone(),
                values: g.values.clone(),
                capped_cells: g.capped_cells.clone(),
            })),
        }
    }
}

/// Loads and validates a field file.
pub fn load_field(path: &Path) -> Result<Field, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::validation(format!("cannot read field file {}: {e}", path.display()))
    })?;
    let file: FieldFile = serde_json::from_str(&text).map_err(|e| {
        CliError::validation(format!("malformed field file {}: {e}", path.display()))
    })?;
    file.to_field()
}

// ---------------------------------------------------------------------------
// Measure files
// ---------------------------------------------------------------------------

/// Weighted point-cloud file; empty weights mean unit weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureFile {
    /// One row per point.
    pub points: Vec<Vec<f64>>,
    /// One weight per point (or empty).
    #[serde(default)]
    pub weights: Vec<f64>,
}

impl MeasureFile {
    /// Builds the runtime measure, revalidating every constraint.
    pub fn to_measure(&self) -> Result<DiscreteMeasure, CliError> {
        let dim = self
            .points
            .first()
            .map(Vec::len)
            .ok_or_else(|| CliError::validation("measure file holds no points"))?;
        if self.points.iter().any(|row| row.len() != dim) {
            return Err(CliError::validation(
                "all measure points must share one dimension",
            ));
        }
        let flat: Vec<f64> = self.points.iter().flatten().copied().collect();
        let weights = if self.weights.is_empty() {
            vec![1.0; self.points.len()]
        } else {
            self.weights.clone()
        };
        DiscreteMeasure::new(dim, flat, weights).map_err(CliError::from_core)
    }
}

/// Loads and validates a measure file.
pub fn load_measure(path: &Path) -> Result<DiscreteMeasure, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::validation(format!("cannot read measure file {}: {e}", path.display()))
    })?;
    let file: MeasureFile = serde_json::from_str(&text).map_err(|e| {
        CliError::validation(format!("malformed measure file {}: {e}", path.display()))
    })?;
    file.to_measure()
}

// ---------------------------------------------------------------------------
// Shared report pieces
// ---------------------------------------------------------------------------

/// Affine subspace in report form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceJson {
    /// Base point.
    pub base: Vec<f64>,
    /// Orthonormal rows.
    pub frame: Vec<Vec<f64>>,
    /// Subspace dimension.
    pub k: usize,
}

impl SubspaceJson {
    /// Captures a runtime subspace.
    #[must_use]
    pub fn from_subspace(v: &AffineSubspace) -> Self {
        Self {
            base: v.base().to_vec(),
            frame: v.frame().chunks(v.dim()).map(<[f64]>::to_vec).collect(),
            k: v.k(),
        }
    }
}

// ---------------------------------------------------------------------------
// Density-scan report
// ---------------------------------------------------------------------------

/// JSON artifact of a density scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityScanJson {
    /// Resolved run configuration.
    pub config: ConfigEcho,
    /// Scan centre.
    pub center: Vec<f64>,
    /// Scale ladder.
    pub radii: Vec<f64>,
    /// Raw density per scale.
    pub theta: Vec<f64>,
    /// Smoothed density per scale.
    pub vartheta: Vec<f64>,
    /// Two-scale gap per scale.
    pub w: Vec<f64>,
    /// Trust tolerance per scale.
    pub tol: Vec<f64>,
    /// Quadrature rule identifier.
    pub rule: String,
    /// Radial node count of the rule.
    pub radial_nodes: usize,
    /// Angular node count of the rule.
    pub angular_nodes: usize,
    /// Cells skipped by grid quadrature.
    pub skipped_cells: usize,
    /// Largest tolerance-adjusted gap violation (0 when monotone).
    pub max_monotonicity_violation: f64,
}

impl DensityScanJson {
    /// Assembles the artifact from a finished scan.
    #[must_use]
    pub fn from_scan(scan: &DensityScan, config: ConfigEcho) -> Self {
        let (radial_nodes, angular_nodes) = scan.node_counts();
        Self {
            config,
            center: scan.center().to_vec(),
            radii: scan.radii().to_vec(),
            theta: scan.theta().to_vec(),
            vartheta: scan.vartheta().to_vec(),
            w: scan.gap().to_vec(),
            tol: scan.tol().to_vec(),
            rule: scan.rule().to_string(),
            radial_nodes,
            angular_nodes,
            skipped_cells: scan.skipped_cells(),
            max_monotonicity_violation: scan.max_monotonicity_violation(),
        }
    }

    /// Flat `r,theta,vartheta,W,tol` table.
    #[must_use]
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,theta,vartheta,W,tol\n");
        for i in 0..self.radii.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                self.radii[i], self.theta[i], self.vartheta[i], self.w[i], self.tol[i]
            );
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Fit-plane report
// ---------------------------------------------------------------------------

/// JSON artifact of a displacement fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitPlaneJson {
    /// Resolved run configuration.
    pub config: ConfigEcho,
    /// Probe centre.
    pub x: Vec<f64>,
    /// Probe scale.
    pub r: f64,
    /// Subspace dimension.
    pub k: usize,
    /// Scale-normalized displacement value.
    pub displacement: f64,
    /// Minimizing affine subspace.
    pub minimizer: SubspaceJson,
    /// Centre of mass of the restricted measure.
    pub x_cm: Vec<f64>,
    /// Second-moment eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Largest eigen-equation residual of the spectrum.
    pub eigen_residual: f64,
}

// ---------------------------------------------------------------------------
// Strata report
// ---------------------------------------------------------------------------

/// JSON artifact of a strata classification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrataJson {
    /// Resolved run configuration.
    pub config: ConfigEcho,
    /// Ambient dimension.
    pub n: usize,
    /// Symmetry threshold.
    pub eps: f64,
    /// Smallest dyadic scale.
    pub r_min: f64,
    /// Frame dimension of the probe grid.
    pub probe_k: usize,
    /// Derivative order of the regularity scales.
    pub reg_order: usize,
    /// Dyadic scale ladder.
    pub scales: Vec<f64>,
    /// Classified points, one row each.
    pub points: Vec<Vec<f64>>,
    /// Per point: tightest stratum index, if classified.
    pub stratum_index: Vec<Option<usize>>,
    /// Per point, per stratum dimension: `"in"`, `"out"`, or
    /// `"undetermined"`.
    pub membership: Vec<Vec<String>>,
    /// Per point, per scale: two-scale density gap of the probe.
    pub gap_deficits: Vec<Vec<f64>>,
    /// Per point, per scale: minimal invariance deficit of the probe.
    pub invariance_deficits: Vec<Vec<f64>>,
    /// Per point, per scale: probe verdict at the report threshold.
    pub verdicts: Vec<Vec<bool>>,
    /// Per point: number of skipped scales.
    pub skipped_scales: Vec<usize>,
    /// Per point: regularity scale at the requested order.
    pub regularity_scales: Vec<f64>,
}

fn membership_name(m: Membership) -> &'static str {
    match m {
        Membership::In => "in",
        Membership::Out => "out",
        Membership::Undetermined => "undetermined",
    }
}

impl StrataJson {
    /// Assembles the artifact from one or more chunked reports computed
    /// under the same configuration (points concatenate in order).
    pub fn from_reports(
        reports: &[StrataReport],
        config: ConfigEcho,
    ) -> Result<Self, CliError> {
        let first = reports
            .first()
            .ok_or_else(|| CliError::validation("no strata chunks to merge"))?;
        let n = first.dim();
        let mut out = Self {
            config,
            n,
            eps: first.eps(),
            r_min: first.r_min(),
            probe_k: first.probe_k(),
            reg_order: first.reg_order(),
            scales: first.scales().to_vec(),
            points: Vec::new(),
            stratum_index: Vec::new(),
            membership: Vec::new(),
            gap_deficits: Vec::new(),
            invariance_deficits: Vec::new(),
            verdicts: Vec::new(),
            skipped_scales: Vec::new(),
            regularity_scales: Vec::new(),
        };
        for rep in reports {
            if rep.scales() != out.scales.as_slice() {
                return Err(CliError::validation(
                    "strata chunks disagree on the scale ladder",
                ));
            }
            out.points
                .extend(rep.points().chunks(n).map(<[f64]>::to_vec));
            out.stratum_index.extend_from_slice(rep.stratum_index());
            out.membership.extend(
                rep.membership()
                    .iter()
                    .map(|row| row.iter().map(|m| membership_name(*m).to_string()).collect()),
            );
            out.gap_deficits.extend(
                rep.probes()
                    .iter()
                    .map(|row| row.iter().map(|p| p.homogeneity_deficit).collect()),
            );
            out.invariance_deficits.extend(
                rep.probes()
                    .iter()
                    .map(|row| row.iter().map(|p| p.invariance_deficit).collect()),
            );
            out.verdicts.extend(
                rep.probes()
                    .iter()
                    .map(|row| row.iter().map(|p| p.verdict).collect()),
            );
            out.skipped_scales.extend_from_slice(rep.skipped_scales());
            out.regularity_scales
                .extend_from_slice(rep.regularity_scales());
        }
        Ok(out)
    }

    /// One row per point: coordinates, stratum index, memberships,
    /// regularity scale, skipped-scale count.
    #[must_use]
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index");
        for d in 0..self.n {
            let _ = write!(out, ",x{d}");
        }
        out.push_str(",stratum_index");
        for k in 0..self.membership.first().map_or(0, Vec::len) {
            let _ = write!(out, ",in_s{k}");
        }
        out.push_str(",regularity_scale,skipped_scales\n");
        for (i, point) in self.points.iter().enumerate() {
            let _ = write!(out, "{i}");
            for c in point {
                let _ = write!(out, ",{c}");
            }
            match self.stratum_index[i] {
                Some(k) => {
                    let _ = write!(out, ",{k}");
                }
                None => out.push_str(","),
            }
            for m in &self.membership[i] {
                let _ = write!(out, ",{m}");
            }
            let _ = writeln!(
                out,
                ",{},{}",
                self.regularity_scales[i], self.skipped_scales[i]
            );
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Cover report
// ---------------------------------------------------------------------------

/// One covering-tree node in report form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverNodeJson {
    /// Ball centre.
    pub center: Vec<f64>,
    /// Ball radius.
    pub radius: f64,
    /// Classification label.
    pub label: String,
    /// Number of sampled pinch points.
    pub pinch_count: usize,
    /// Effectively spanned subspace, when one was certified.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subspace: Option<SubspaceJson>,
    /// Child balls.
    pub children: Vec<CoverNodeJson>,
}

fn label_name(label: BallLabel) -> &'static str {
    match label {
        BallLabel::Good => "good",
        BallLabel::Bad => "bad",
        BallLabel::TerminalR => "terminal_r",
        BallLabel::EnergyDrop => "energy_drop",
    }
}

fn node_json(node: &BallNode, n: usize) -> CoverNodeJson {
    CoverNodeJson {
        center: node.center.clone(),
        radius: node.radius,
        label: label_name(node.label).to_string(),
        pinch_count: node.pinch.len() / n.max(1),
        subspace: node.subspace.as_ref().map(SubspaceJson::from_subspace),
        children: node.children.iter().map(|c| node_json(c, n)).collect(),
    }
}

/// JSON artifact of a covering run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverJson {
    /// Resolved run configuration.
    pub config: ConfigEcho,
    /// Stratum dimension.
    pub k: usize,
    /// Symmetry threshold.
    pub eps: f64,
    /// Terminal radius.
    pub r: f64,
    /// Top radius.
    pub big_r: f64,
    /// Refinement ratio.
    pub rho: f64,
    /// Pinch margin.
    pub delta: f64,
    /// Stratum-detection threshold.
    pub xi: f64,
    /// Energy ceiling at the root.
    pub energy: f64,
    /// Number of leaves.
    pub leaf_count: usize,
    /// Number of terminal-radius leaves.
    pub terminal_leaf_count: usize,
    /// `Σ_leaves r^k`.
    pub tally: f64,
    /// Whether the structural invariants (sibling disjointness, refinement
    /// rule, stratum coverage) verified on the built tree.
    pub invariants_ok: bool,
    /// Detected stratum sample, one row per point.
    pub stratum_sample: Vec<Vec<f64>>,
    /// Root ball (absent when no stratum was detected).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root: Option<CoverNodeJson>,
}

impl CoverJson {
    /// Assembles the artifact from a finished tree.
    #[must_use]
    pub fn from_tree(tree: &CoverTree, n: usize, config: ConfigEcho) -> Self {
        Self {
            config,
            k: tree.k,
            eps: tree.eps,
            r: tree.r,
            big_r: tree.big_r,
            rho: tree.rho,
            delta: tree.delta,
            xi: tree.xi,
            energy: tree.energy,
            leaf_count: tree.leaves().len(),
            terminal_leaf_count: tree.terminal_leaf_count(),
            tally: tree.tally,
            invariants_ok: tree.check_invariants().is_ok(),
            stratum_sample: tree
                .stratum_sample
                .chunks(n)
                .map(<[f64]>::to_vec)
                .collect(),
            root: tree.root.as_ref().map(|r| node_json(r, n)),
        }
    }
}

// ---------------------------------------------------------------------------
// Packing report
// ---------------------------------------------------------------------------

/// JSON artifact of a packing check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PackingJson {
    /// Resolved run configuration.
    pub config: ConfigEcho,
    /// Plane dimension.
    pub k: usize,
    /// Top scale.
    pub r: f64,
    /// Packing centre.
    pub x0: Vec<f64>,
    /// Dyadic hypothesis scales.
    pub scales: Vec<f64>,
    /// Worst hypothesis integral per scale.
    pub scale_integrals: Vec<f64>,
    /// Scale-normalized hypothesis ratio per scale.
    pub scale_ratios: Vec<f64>,
    /// Largest normalized hypothesis ratio.
    pub max_hypothesis_ratio: f64,
    /// Mass of the top ball over `r^k`.
    pub packing_ratio: f64,
    /// Number of (probe, atom) displacement evaluations.
    pub pairs_examined: usize,
}

impl PackingJson {
    /// Assembles the artifact from a finished check.
    #[must_use]
    pub fn from_report(rep: &PackingReport, config: ConfigEcho) -> Self {
        Self {
            config,
            k: rep.k,
            r: rep.r,
            x0: rep.x0.clone(),
            scales: rep.scales.clone(),
            scale_integrals: rep.scale_integrals.clone(),
            scale_ratios: rep.scale_ratios.clone(),
            max_hypothesis_ratio: rep.max_hypothesis_ratio,
            packing_ratio: rep.packing_ratio,
            pairs_examined: rep.pairs_examined,
        }
    }
}

// ---------------------------------------------------------------------------
// Tail report
// ---------------------------------------------------------------------------

/// JSON artifact of a superlevel-tail run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailJson {
    /// Resolved run configuration.
    pub config: ConfigEcho,
    /// Derivative order measured.
    pub j: usize,
    /// Ball centre.
    pub center: Vec<f64>,
    /// Ball radius.
    pub radius: f64,
    /// Voxel edge length.
    pub resolution: f64,
    /// Thresholds.
    pub lambda: Vec<f64>,
    /// Superlevel measures.
    pub measure: Vec<f64>,
    /// Fitted log-log slope, when enough of the tail is resolved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    /// Root-mean-square log residual of the fit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    /// Number of points entering the fit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_points: Option<usize>,
}

impl TailJson {
    /// Assembles the artifact from a finished tail run.
    #[must_use]
    pub fn from_report(
        rep: &TailReport,
        j: usize,
        center: &[f64],
        radius: f64,
        resolution: f64,
        config: ConfigEcho,
    ) -> Self {
        Self {
            config,
            j,
            center: center.to_vec(),
            radius,
            resolution,
            lambda: rep.pairs.iter().map(|p| p.0).collect(),
            measure: rep.pairs.iter().map(|p| p.1).collect(),
            exponent: rep.fit.as_ref().map(|f| f.exponent),
            residual: rep.fit.as_ref().map(|f| f.residual),
            fit_points: rep.fit.as_ref().map(|f| f.points),
        }
    }

    /// Flat `lambda,measure` table.
    #[must_use]
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,measure\n");
        for (l, m) in self.lambda.iter().zip(&self.measure) {
            let _ = writeln!(out, "{l},{m}");
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

/// Serializes a report to pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::validation(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| {
            CliError::validation(format!("cannot write {}: {e}", p.display()))
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
