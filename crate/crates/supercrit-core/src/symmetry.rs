//! Quantitative symmetry: directional invariance deficits, two-condition
//! symmetry probes, stratum membership, and regularity scales.
//!
//! A field is quantitatively `(k, eps)`-symmetric in `B_r(x)` when two
//! deficits are both below `eps`:
//!
//! 1. the homogeneity deficit — the smoothed-density gap
//!    `vartheta_{2r} - vartheta_r` (or, in the alternative mode, the scaled
//!    radial-derivative deficit), and
//! 2. the invariance deficit along some k-frame `V`,
//!    `r^{alpha_p - n} ∫_{B_r(x)} Σ_i |v_i . ∇u|²`.
//!
//! Both conditions are computed from the gradient second-moment matrix
//! `G = r^{alpha_p - n} ∫_{B_r(x)} ∇u ⊗ ∇u`: the deficit along `V` is the
//! trace of `Vᵀ G V`, and its exact minimum over all k-frames is the sum of
//! the `k` smallest eigenvalues of `G` (with the corresponding eigenvectors
//! as the minimizing frame).
//!
//! The k-th stratum collects the points at which the field is **not**
//! `(k+1, eps)`-symmetric at any dyadic scale in `[r_min, 1)`; strata are
//! nested upward in `k`.  [`StrataReport`] classifies a sample of points
//! across all `k` at once, and [`regularity_scale`] measures the largest
//! scale at which derivatives up to a requested order stay below the
//! critical power profile.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::float::FloatExt;

use crate::density::{self, QuadraturePolicy};
use crate::error::{Error, Result};
use crate::field::{AnalyticField, Field, PowerLawSingular};
use crate::geom;
use crate::jacobi::{symmetric_eigen, SymmetricEigen};
use crate::params::ProblemParams;
use crate::quad::{halton_ball, halton_bases, halton_point, GaussLegendre, SphereRule};
use crate::reduce::{geometry_for, onplane_pure_power_integral, reduced_ball_integral};
use crate::subspace::AffineSubspace;
use crate::tolerances;

// ---------------------------------------------------------------------------
// Gradient second-moment matrix
// ---------------------------------------------------------------------------

/// The scaled gradient second-moment matrix
/// `G = r^{alpha_p - n} ∫_{B_r(x)} ∇u ⊗ ∇u` (row-major `n x n`).
///
/// Every invariance deficit is a quadratic form in `G`; computing the matrix
/// once therefore prices all frames and all `k` simultaneously.
///
/// For the singular model the matrix has closed structure: spine directions
/// are annihilated exactly, and the transverse block is axially symmetric
/// around the centre's transverse offset, leaving two scalar profile
/// integrals (evaluated by the reduced rule, or in closed form on the
/// spine).
pub fn gradient_moment_matrix(
    u: &Field,
    x: &[f64],
    r: f64,
    policy: &QuadraturePolicy,
) -> Result<Vec<f64>> {
    density::check_center(u, x)?;
    density::check_scale(r)?;
    let n = u.dim();
    match u {
        Field::Analytic(AnalyticField::Zero { .. }) => Ok(vec![0.0; n * n]),
        Field::Analytic(AnalyticField::PowerLawSingular(f)) => {
            power_law_moment_matrix(f, x, r, policy)
        }
        Field::Analytic(a) => {
            let alpha_p = a.params().alpha_p();
            let gl = GaussLegendre::new(policy.radial_nodes);
            let sphere = SphereRule::new(n, policy.sphere_points);
            let mut g = vec![0.0; n * n];
            let mut y = vec![0.0; n];
            for (rho, wr) in gl.iter_on(0.0, r) {
                let shell = wr * rho.powi(n as i32 - 1);
                for (omega, ws) in sphere.iter() {
                    for i in 0..n {
                        y[i] = x[i] + rho * omega[i];
                    }
                    let grad = a.gradient(&y);
                    let w = shell * ws;
                    for i in 0..n {
                        for j in i..n {
                            g[i * n + j] += w * grad[i] * grad[j];
                        }
                    }
                }
            }
            finish_moment_matrix(&mut g, n, r.powf(alpha_p - n as f64))?;
            Ok(g)
        }
        Field::Grid(gf) => {
            let alpha_p = gf.params.alpha_p();
            let mut g = vec![0.0; n * n];
            let (_, _skipped) =
                density::grid_ball_sum(gf, x, r, policy.skip_capped, |_, grad, _| {
                    for i in 0..n {
                        for j in i..n {
                            g[i * n + j] += grad[i] * grad[j];
                        }
                    }
                    0.0
                })?;
            let vol = gf.spacing.powi(n as i32);
            finish_moment_matrix(&mut g, n, vol * r.powf(alpha_p - n as f64))?;
            Ok(g)
        }
    }
}

/// Symmetrises the accumulated upper triangle, applies the scale factor,
/// and rejects non-finite results.
fn finish_moment_matrix(g: &mut [f64], n: usize, scale: f64) -> Result<()> {
    for i in 0..n {
        for j in 0..i {
            g[i * n + j] = g[j * n + i];
        }
    }
    for v in g.iter_mut() {
        *v *= scale;
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand);
        }
    }
    Ok(())
}

/// Closed-structure moment matrix for the singular model.
///
/// With `z = y - x` and the centre at transverse offset `b a_hat` from the
/// spine, the gradient is `-c0 alpha d^{-alpha-2} P(y - c)`, and
/// `P(y - c) = (b + s cos γ) a_hat + s sin γ w_hat` with `w_hat` uniformly
/// distributed orthogonal to `a_hat` in the transverse space.  Cross terms
/// integrate to zero, leaving
///   `G = A a_hat a_hatᵀ + B (P - a_hat a_hatᵀ)`,
///   `A = c0² alpha² I[((b + s cos γ)/d)² d^{-alpha_p}]`,
///   `B = c0² alpha² I[(s sin γ / d)² d^{-alpha_p}] / (ν - 1)`,
/// all scaled by `r^{alpha_p - n}`; both bracketed ratios are at most 1, so
/// the integrands stay float-healthy near the spine.  On the spine the
/// matrix is isotropic transverse: `G = (T/ν) P` with
/// `T = c0² alpha² I[d^{-alpha_p}]` in closed form.
fn power_law_moment_matrix(
    f: &PowerLawSingular,
    x: &[f64],
    r: f64,
    policy: &QuadraturePolicy,
) -> Result<Vec<f64>> {
    let params = f.params;
    let (alpha, alpha_p) = (params.alpha(), params.alpha_p());
    let n = params.n();
    let nu = n - f.m;
    let scale = r.powf(alpha_p - n as f64);
    let c2a2 = f.c0 * f.c0 * alpha * alpha;

    // Transverse projector P = I - Σ_j f_j f_jᵀ over the spine frame rows.
    let mut proj = vec![0.0; n * n];
    for i in 0..n {
        proj[i * n + i] = 1.0;
    }
    for row in f.frame.chunks_exact(n) {
        for i in 0..n {
            for j in 0..n {
                proj[i * n + j] -= row[i] * row[j];
            }
        }
    }

    let b = f.spine_distance(x);
    let mut g = vec![0.0; n * n];
    if b <= 1e-14 * r {
        let t = c2a2 * scale * onplane_pure_power_integral(nu, f.m, r, alpha_p);
        let per_direction = t / nu as f64;
        for i in 0..n * n {
            g[i] = per_direction * proj[i];
        }
        return Ok(g);
    }

    let geo = geometry_for(n, f.m, b, r);
    let ia = reduced_ball_integral(geo, policy.reduced, &[], |pt| {
        let along = (b + pt.s * pt.cos_gamma) / pt.d;
        along * along * pt.d.powf(-alpha_p)
    })?;
    let ib = reduced_ball_integral(geo, policy.reduced, &[], |pt| {
        let sin2 = (1.0 - pt.cos_gamma * pt.cos_gamma).max(0.0);
        (pt.s * pt.s * sin2) / (pt.d * pt.d) * pt.d.powf(-alpha_p)
    })?;
    let a_coef = c2a2 * scale * ia;
    let b_coef = c2a2 * scale * ib / (nu - 1) as f64;

    let t = f.transverse(x);
    let a_hat: Vec<f64> = t.iter().map(|c| c / b).collect();
    for i in 0..n {
        for j in 0..n {
            let aa = a_hat[i] * a_hat[j];
            g[i * n + j] = a_coef * aa + b_coef * (proj[i * n + j] - aa);
        }
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// Invariance deficits
// ---------------------------------------------------------------------------

/// Invariance deficit of `u` along the orthonormal frame `V` (rows of
/// length `n`): `r^{alpha_p - n} ∫_{B_r(x)} Σ_i |v_i . ∇u|²`, evaluated as
/// the trace of `Vᵀ G V` against the gradient moment matrix.
///
/// An empty frame yields 0.  Fails with [`Error::BadFrame`] when the rows
/// are not orthonormal and [`Error::OutOfDomain`] when `B_r(x)` exits a
/// sampled box.
pub fn invariance_deficit(u: &Field, frame: &[f64], x: &[f64], r: f64) -> Result<f64> {
    invariance_deficit_with_policy(u, frame, x, r, &QuadraturePolicy::default())
}

/// [`invariance_deficit`] under an explicit quadrature policy.
pub fn invariance_deficit_with_policy(
    u: &Field,
    frame: &[f64],
    x: &[f64],
    r: f64,
    policy: &QuadraturePolicy,
) -> Result<f64> {
    let n = u.dim();
    if frame.len() % n != 0 {
        return Err(Error::BadFrame {
            reason: "frame length is not a multiple of the dimension",
        });
    }
    geom::check_frame(frame, frame.len() / n, n)?;
    let g = gradient_moment_matrix(u, x, r, policy)?;
    Ok(quadratic_trace(&g, frame, n))
}

/// `Σ_rows vᵀ G v` for the rows of `frame`.
fn quadratic_trace(g: &[f64], frame: &[f64], n: usize) -> f64 {
    let mut total = 0.0;
    for row in frame.chunks_exact(n) {
        for i in 0..n {
            let gi: f64 = (0..n).map(|j| g[i * n + j] * row[j]).sum();
            total += row[i] * gi;
        }
    }
    total
}

/// Exact minimum of the invariance deficit over all k-frames, with its
/// minimizing frame.
///
/// By the trace minimum principle the minimum over `V` of
/// `trace(Vᵀ G V)` is the sum of the `k` smallest eigenvalues of `G`; the
/// returned subspace is based at `x` and spanned by the corresponding
/// eigenvectors, smallest eigenvalue first.
pub fn min_invariance_deficit(
    u: &Field,
    x: &[f64],
    r: f64,
    k: usize,
) -> Result<(f64, AffineSubspace)> {
    min_invariance_deficit_with_policy(u, x, r, k, &QuadraturePolicy::default())
}

/// [`min_invariance_deficit`] under an explicit quadrature policy.
pub fn min_invariance_deficit_with_policy(
    u: &Field,
    x: &[f64],
    r: f64,
    k: usize,
    policy: &QuadraturePolicy,
) -> Result<(f64, AffineSubspace)> {
    let n = u.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter {
            name: "k",
            constraint: "frame dimension must satisfy 1 <= k <= n",
        });
    }
    let g = gradient_moment_matrix(u, x, r, policy)?;
    let eig = symmetric_eigen(&g, n);
    let value: f64 = eig.values[n - k..].iter().sum();
    let mut frame = Vec::with_capacity(k * n);
    for i in (n - k..n).rev() {
        frame.extend_from_slice(&eig.vectors[i * n..(i + 1) * n]);
    }
    let subspace = AffineSubspace::new(x.to_vec(), frame, k)?;
    Ok((value, subspace))
}

// ---------------------------------------------------------------------------
// Symmetry probes
// ---------------------------------------------------------------------------

/// Which homogeneity deficit a probe used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomogeneityMode {
    /// Smoothed-density gap `vartheta_{2r} - vartheta_r`.
    DensityGap,
    /// Scaled radial-derivative deficit.
    RadialDeficit,
}

/// Record of one quantitative symmetry test at `(x, r, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryProbe {
    /// Probe centre.
    pub x: Vec<f64>,
    /// Probe scale.
    pub r: f64,
    /// Frame dimension tested.
    pub k: usize,
    /// Homogeneity measure used.
    pub mode: HomogeneityMode,
    /// Homogeneity deficit (nonnegative up to quadrature tolerance).
    pub homogeneity_deficit: f64,
    /// Minimal invariance deficit over k-frames (0 when `k = 0`).
    pub invariance_deficit: f64,
    /// Minimizing frame, based at the probe centre (a point when `k = 0`).
    pub best_frame: AffineSubspace,
    /// True iff both deficits are strictly below the tested `eps`.
    pub verdict: bool,
}

/// Tests whether `u` is quantitatively `(k, eps)`-symmetric in `B_r(x)`:
/// density gap below `eps` and minimal invariance deficit below `eps`.
///
/// Requires `B_{20 r}(x)` inside the domain (the gap looks at the doubled
/// scale, whose smoothing window reaches out to `10 . 2r`).
pub fn probe_symmetry(u: &Field, x: &[f64], r: f64, k: usize, eps: f64) -> Result<SymmetryProbe> {
    probe_symmetry_with_policy(u, x, r, k, eps, &QuadraturePolicy::default())
}

/// [`probe_symmetry`] under an explicit quadrature policy.
pub fn probe_symmetry_with_policy(
    u: &Field,
    x: &[f64],
    r: f64,
    k: usize,
    eps: f64,
    policy: &QuadraturePolicy,
) -> Result<SymmetryProbe> {
    probe_with_mode(u, x, r, k, eps, HomogeneityMode::DensityGap, policy)
}

/// Symmetry probe with the radial-derivative deficit as the homogeneity
/// measure (pre: `B_{8r}(x)` in the domain).
pub fn probe_symmetry_radial(
    u: &Field,
    x: &[f64],
    r: f64,
    k: usize,
    eps: f64,
) -> Result<SymmetryProbe> {
    probe_with_mode(
        u,
        x,
        r,
        k,
        eps,
        HomogeneityMode::RadialDeficit,
        &QuadraturePolicy::default(),
    )
}

fn probe_with_mode(
    u: &Field,
    x: &[f64],
    r: f64,
    k: usize,
    eps: f64,
    mode: HomogeneityMode,
    policy: &QuadraturePolicy,
) -> Result<SymmetryProbe> {
    density::check_center(u, x)?;
    density::check_scale(r)?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            constraint: "symmetry threshold must be positive and finite",
        });
    }
    if k > u.dim() {
        return Err(Error::InvalidParameter {
            name: "k",
            constraint: "frame dimension cannot exceed the ambient dimension",
        });
    }
    let needed = match mode {
        HomogeneityMode::DensityGap => 20.0 * r,
        HomogeneityMode::RadialDeficit => 8.0 * r,
    };
    if !u.contains_ball(x, needed) {
        return Err(Error::OutOfDomain {
            what: "symmetry probe needs its enlarged ball inside the domain",
        });
    }
    let homogeneity = match mode {
        HomogeneityMode::DensityGap => density::density_gap_with_policy(u, x, r, policy)?,
        HomogeneityMode::RadialDeficit => density::radial_deficit_with_policy(u, x, r, policy)?,
    };
    let (inv, best_frame) = if k == 0 {
        (0.0, AffineSubspace::new(x.to_vec(), Vec::new(), 0)?)
    } else {
        min_invariance_deficit_with_policy(u, x, r, k, policy)?
    };
    let verdict = homogeneity < eps && inv < eps;
    Ok(SymmetryProbe {
        x: x.to_vec(),
        r,
        k,
        mode,
        homogeneity_deficit: homogeneity,
        invariance_deficit: inv,
        best_frame,
        verdict,
    })
}

// ---------------------------------------------------------------------------
// Stratum membership
// ---------------------------------------------------------------------------

/// Ternary stratum classification: near-boundary points whose scale set is
/// mostly unusable stay unclassified rather than silently mislabeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    /// Member: no usable dyadic scale is `(k+1, eps)`-symmetric.
    In,
    /// Non-member: some scale is `(k+1, eps)`-symmetric.
    Out,
    /// More than a quarter of the scales were skipped (ball exits the box,
    /// or too few grid cells), so no classification is claimed.
    Undetermined,
}

impl Membership {
    /// True for [`Membership::In`].
    #[must_use]
    pub fn is_in(self) -> bool {
        self == Membership::In
    }
}

/// Fraction of skipped scales above which classification is refused.
const MAX_SKIPPED_FRACTION: f64 = 0.25;

/// Whether `x` belongs to the k-th stratum at threshold `eps`: true when
/// `u` is not `(k+1, eps)`-symmetric in `B_s(x)` for **every** dyadic
/// `s = r_min 2^j` in `[r_min, 1)`.
///
/// Scales whose enlarged ball exits a sampled box (or whose ball holds too
/// few cells) are skipped and counted; more than 25% skipped scales yields
/// [`Membership::Undetermined`].
pub fn stratum_membership(
    u: &Field,
    x: &[f64],
    k: usize,
    eps: f64,
    r_min: f64,
) -> Result<Membership> {
    stratum_membership_with_policy(u, x, k, eps, r_min, &QuadraturePolicy::default())
}

/// [`stratum_membership`] under an explicit quadrature policy.
pub fn stratum_membership_with_policy(
    u: &Field,
    x: &[f64],
    k: usize,
    eps: f64,
    r_min: f64,
    policy: &QuadraturePolicy,
) -> Result<Membership> {
    let n = u.dim();
    if k + 1 > n {
        return Err(Error::InvalidParameter {
            name: "k",
            constraint: "stratum index must satisfy k + 1 <= n",
        });
    }
    let scales = dyadic_scales(r_min)?;
    let mut skipped = 0usize;
    for &s in &scales {
        match probe_symmetry_with_policy(u, x, s, k + 1, eps, policy) {
            Ok(probe) => {
                if probe.verdict {
                    return Ok(Membership::Out);
                }
            }
            Err(Error::OutOfDomain { .. }) | Err(Error::BallTooSmall { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if (skipped as f64) > MAX_SKIPPED_FRACTION * scales.len() as f64 {
        return Ok(Membership::Undetermined);
    }
    Ok(Membership::In)
}

/// The dyadic scales `{r_min 2^j} ∩ [r_min, 1)`.
fn dyadic_scales(r_min: f64) -> Result<Vec<f64>> {
    if !(r_min.is_finite() && r_min > 0.0 && r_min < 1.0) {
        return Err(Error::InvalidParameter {
            name: "r_min",
            constraint: "smallest scale must lie in (0, 1)",
        });
    }
    let mut scales = Vec::new();
    let mut s = r_min;
    while s < 1.0 {
        scales.push(s);
        s *= 2.0;
    }
    Ok(scales)
}

// ---------------------------------------------------------------------------
// Strata report
// ---------------------------------------------------------------------------

/// Parameters of a strata classification run.
#[derive(Debug, Clone)]
pub struct StrataConfig {
    /// Symmetry threshold.
    pub eps: f64,
    /// Smallest dyadic scale.
    pub r_min: f64,
    /// Frame dimension recorded in the probe grid; `None` selects the
    /// parameter threshold dimension for `(n, p)`.
    pub probe_k: Option<usize>,
    /// Derivative order for the per-point regularity scales.
    pub reg_order: usize,
    /// Quadrature policy for all probes.
    pub policy: QuadraturePolicy,
}

impl Default for StrataConfig {
    fn default() -> Self {
        Self {
            eps: 1e-2,
            r_min: 0.05,
            probe_k: None,
            reg_order: 1,
            policy: QuadraturePolicy::default(),
        }
    }
}

/// Classification of a point sample: per-point membership across every
/// stratum index, the stratum assignment, a probe grid at one chosen frame
/// dimension, and regularity scales.
#[derive(Debug, Clone)]
pub struct StrataReport {
    dim: usize,
    eps: f64,
    r_min: f64,
    probe_k: usize,
    reg_order: usize,
    scales: Vec<f64>,
    points: Vec<f64>,
    membership: Vec<Vec<Membership>>,
    stratum_index: Vec<Option<usize>>,
    probes: Vec<Vec<SymmetryProbe>>,
    skipped_scales: Vec<usize>,
    regularity_scales: Vec<f64>,
}

impl StrataReport {
    /// Classifies `points` (flat, `n` coordinates each) under `cfg`.
    ///
    /// Per point and scale the density gap and the gradient moment
    /// spectrum are computed once; membership for every stratum index and
    /// the probe grid at `cfg.probe_k` are derived from that shared data,
    /// so the report is automatically consistent across `k`.
    pub fn compute(u: &Field, points: &[f64], cfg: &StrataConfig) -> Result<Self> {
        let n = u.dim();
        if points.is_empty() || points.len() % n != 0 {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: points.len() % n.max(1),
            });
        }
        if !(cfg.eps.is_finite() && cfg.eps > 0.0) {
            return Err(Error::InvalidParameter {
                name: "eps",
                constraint: "symmetry threshold must be positive and finite",
            });
        }
        let probe_k = cfg.probe_k.unwrap_or_else(|| u.params().k_threshold());
        if probe_k > n {
            return Err(Error::InvalidParameter {
                name: "probe_k",
                constraint: "probe frame dimension cannot exceed the ambient dimension",
            });
        }
        let scales = dyadic_scales(cfg.r_min)?;
        let npts = points.len() / n;

        let mut membership = Vec::with_capacity(npts);
        let mut stratum_index = Vec::with_capacity(npts);
        let mut probes = Vec::with_capacity(npts);
        let mut skipped_scales = Vec::with_capacity(npts);
        let mut regularity_scales = Vec::with_capacity(npts);

        for pi in 0..npts {
            let x = &points[pi * n..(pi + 1) * n];
            let mut skipped = 0usize;
            let mut data: Vec<Option<(f64, SymmetricEigen)>> = Vec::with_capacity(scales.len());
            for &s in &scales {
                data.push(scale_data(u, x, s, &cfg.policy)?);
                if data.last().unwrap().is_none() {
                    skipped += 1;
                }
            }

            // Membership for every stratum index from the shared spectra.
            let tail = |eig: &SymmetricEigen, j: usize| -> f64 {
                eig.values[n - j.min(n)..].iter().sum()
            };
            let mut flags = Vec::with_capacity(n);
            for k in 0..n {
                let symmetric_somewhere = data.iter().flatten().any(|(gap, eig)| {
                    *gap < cfg.eps && tail(eig, k + 1) < cfg.eps
                });
                let flag = if symmetric_somewhere {
                    Membership::Out
                } else if (skipped as f64) > MAX_SKIPPED_FRACTION * scales.len() as f64 {
                    Membership::Undetermined
                } else {
                    Membership::In
                };
                flags.push(flag);
            }
            stratum_index.push(flags.iter().position(|f| f.is_in()));
            membership.push(flags);

            // Probe grid at the chosen frame dimension (evaluated scales
            // only; each probe records its own scale).
            let mut point_probes = Vec::new();
            for (si, entry) in data.iter().enumerate() {
                let Some((gap, eig)) = entry else { continue };
                let inv = tail(eig, probe_k);
                let mut frame = Vec::with_capacity(probe_k * n);
                for i in (n - probe_k..n).rev() {
                    frame.extend_from_slice(&eig.vectors[i * n..(i + 1) * n]);
                }
                point_probes.push(SymmetryProbe {
                    x: x.to_vec(),
                    r: scales[si],
                    k: probe_k,
                    mode: HomogeneityMode::DensityGap,
                    homogeneity_deficit: *gap,
                    invariance_deficit: inv,
                    best_frame: AffineSubspace::new(x.to_vec(), frame, probe_k)?,
                    verdict: *gap < cfg.eps && inv < cfg.eps,
                });
            }
            probes.push(point_probes);
            skipped_scales.push(skipped);
            regularity_scales.push(regularity_scale(u, x, cfg.reg_order)?);
        }

        let report = Self {
            dim: n,
            eps: cfg.eps,
            r_min: cfg.r_min,
            probe_k,
            reg_order: cfg.reg_order,
            scales,
            points: points.to_vec(),
            membership,
            stratum_index,
            probes,
            skipped_scales,
            regularity_scales,
        };
        debug_assert!(report.check_nesting(), "stratum nesting violated");
        Ok(report)
    }

    /// Ambient dimension.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Symmetry threshold.
    #[must_use]
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Smallest dyadic scale.
    #[must_use]
    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    /// Frame dimension of the recorded probe grid.
    #[must_use]
    pub fn probe_k(&self) -> usize {
        self.probe_k
    }

    /// Derivative order used for the regularity scales.
    #[must_use]
    pub fn reg_order(&self) -> usize {
        self.reg_order
    }

    /// Dyadic scale list.
    #[must_use]
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Flat sample points (`dim` coordinates each).
    #[must_use]
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of sample points.
    #[must_use]
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    /// True when the report holds no points.
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Per-point membership flags for stratum indices `0..n`.
    #[must_use]
    pub fn membership(&self) -> &[Vec<Membership>] {
        &self.membership
    }

    /// Per-point stratum assignment: the smallest stratum index with
    /// membership (`None` when the point escapes every stratum — by the
    /// nesting, membership then holds for every larger index as well).
    #[must_use]
    pub fn stratum_index(&self) -> &[Option<usize>] {
        &self.stratum_index
    }

    /// Per-point probe records at [`Self::probe_k`] (evaluated scales only).
    #[must_use]
    pub fn probes(&self) -> &[Vec<SymmetryProbe>] {
        &self.probes
    }

    /// Per-point count of skipped scales.
    #[must_use]
    pub fn skipped_scales(&self) -> &[usize] {
        &self.skipped_scales
    }

    /// Per-point regularity scales at [`Self::reg_order`].
    #[must_use]
    pub fn regularity_scales(&self) -> &[f64] {
        &self.regularity_scales
    }

    /// Verifies the upward nesting of the computed strata: per point, the
    /// membership sequence never steps down from `In` (ranking
    /// `Out < Undetermined < In`).
    #[must_use]
    pub fn check_nesting(&self) -> bool {
        fn rank(m: Membership) -> u8 {
            match m {
                Membership::Out => 0,
                Membership::Undetermined => 1,
                Membership::In => 2,
            }
        }
        self.membership
            .iter()
            .all(|flags| flags.windows(2).all(|w| rank(w[0]) <= rank(w[1])))
    }
}

/// Shared per-(point, scale) probe data: density gap and gradient moment
/// spectrum.  `None` marks a skipped scale (enlarged ball exits the box,
/// or too few grid cells).
fn scale_data(
    u: &Field,
    x: &[f64],
    s: f64,
    policy: &QuadraturePolicy,
) -> Result<Option<(f64, SymmetricEigen)>> {
    if !u.contains_ball(x, 20.0 * s) {
        return Ok(None);
    }
    let gap = match density::density_gap_with_policy(u, x, s, policy) {
        Ok(gap) => gap,
        Err(Error::OutOfDomain { .. }) | Err(Error::BallTooSmall { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let g = match gradient_moment_matrix(u, x, s, policy) {
        Ok(g) => g,
        Err(Error::OutOfDomain { .. }) | Err(Error::BallTooSmall { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok(Some((gap, symmetric_eigen(&g, u.dim()))))
}

// ---------------------------------------------------------------------------
// Regularity scale
// ---------------------------------------------------------------------------

/// Largest scale (capped at 1) at which the derivative sum stays below the
/// critical power profile:
/// `sup{0 <= r <= 1 : sup_{B_r(x)} Σ_{i<=j} r^i |D^i u| <= r^{-2/(p-1)}}`.
///
/// The boundary is located by bisection to width
/// [`tolerances::BISECTION_WIDTH`].  The inner supremum is exact for the
/// closed-form model (attained at the point of the ball nearest the spine,
/// where the i-th derivative has operator norm
/// `c0 (alpha)(alpha+1)...(alpha+i-1) d^{-alpha-i}`) and is estimated on
/// sample nodes otherwise.  Sampled boxes support `j <= 2`
/// ([`Error::UnsupportedOrder`] beyond); a ball reaching outside the box
/// counts as unbounded, so the returned scale respects the box.
pub fn regularity_scale(u: &Field, x: &[f64], j: usize) -> Result<f64> {
    density::check_center(u, x)?;
    if let Field::Grid(gf) = u {
        if j > 2 {
            return Err(Error::UnsupportedOrder { j, max: 2 });
        }
        if !gf.contains_point(x) {
            return Err(Error::OutOfDomain {
                what: "regularity scale centre outside the sampled box",
            });
        }
    }
    let alpha = u.params().alpha();
    let condition = |r: f64| -> Result<bool> {
        let sup = sup_derivative_sum(u, x, r, j)?;
        Ok(sup <= r.powf(-alpha))
    };
    if condition(1.0)? {
        return Ok(1.0);
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while hi - lo > tolerances::BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if condition(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Estimate of `sup_{B_r(x)} Σ_{i<=j} r^i |D^i u|` (may be `+inf`).
fn sup_derivative_sum(u: &Field, x: &[f64], r: f64, j: usize) -> Result<f64> {
    let n = u.dim();
    match u {
        Field::Analytic(AnalyticField::Zero { .. }) => Ok(0.0),
        Field::Analytic(AnalyticField::PowerLawSingular(f)) => {
            let alpha = f.params.alpha();
            let delta = f.spine_distance(x) - r;
            if delta <= 0.0 {
                return Ok(f64::INFINITY);
            }
            let mut sum = 0.0;
            let mut deriv_factor = 1.0;
            for i in 0..=j {
                sum += r.powi(i as i32) * f.c0 * deriv_factor * delta.powf(-alpha - i as f64);
                deriv_factor *= alpha + i as f64;
            }
            Ok(sum)
        }
        Field::Analytic(a) => {
            // Smooth bounded field: pointwise sums on sample nodes, higher
            // orders through exact 1-d restrictions along sampled
            // directions (for symmetric derivative tensors the norm is
            // attained on the diagonal).
            let dirs = if j >= 3 { Some(quasi_directions(n, 64, 901)) } else { None };
            let mut best = 0.0f64;
            for node in sample_nodes(x, r, n) {
                let mut sum = a.value(&node).abs();
                if j >= 1 {
                    sum += r * geom::norm(&a.gradient(&node));
                }
                if j >= 2 {
                    let h = a.hessian(&node);
                    let eig = symmetric_eigen(&h, n);
                    let op = eig.values[0].abs().max(eig.values[n - 1].abs());
                    sum += r * r * op;
                }
                if let (Some(dirs), AnalyticField::AffineBump(ab)) = (dirs.as_ref(), a) {
                    // Degree-6 polynomial structure: orders beyond 6 vanish
                    // identically.
                    for i in 3..=j.min(6) {
                        let mut op = 0.0f64;
                        for v in dirs {
                            let coeffs = bump_direction_coeffs(
                                &ab.center,
                                ab.radius,
                                ab.amplitude,
                                &node,
                                v,
                            );
                            op = op.max((factorial(i) * coeffs[i]).abs());
                        }
                        sum += r.powi(i as i32) * op;
                    }
                }
                best = best.max(sum);
            }
            Ok(best)
        }
        Field::Grid(gf) => {
            if !gf.contains_ball(x, r) {
                return Ok(f64::INFINITY);
            }
            let mut best = 0.0f64;
            for node in sample_nodes(x, r, n) {
                let mut sum = gf.value(&node)?.abs();
                if j >= 1 {
                    sum += r * geom::norm(&gf.gradient(&node)?);
                }
                if j >= 2 {
                    let h = gf.hessian(&node)?;
                    let eig = symmetric_eigen(&h, n);
                    let op = eig.values[0].abs().max(eig.values[n - 1].abs());
                    sum += r * r * op;
                }
                best = best.max(sum);
            }
            Ok(best)
        }
    }
}

/// Deterministic supremum sample: the centre, a quasi-random interior
/// cloud, and a boundary ring.
fn sample_nodes(x: &[f64], r: f64, n: usize) -> Vec<Vec<f64>> {
    let mut nodes = vec![x.to_vec()];
    nodes.extend(halton_ball(x, r, 96, 11));
    for omega in quasi_directions(n, 24, 501) {
        nodes.push(x.iter().zip(omega.iter()).map(|(c, o)| c + r * o).collect());
    }
    nodes
}

/// Deterministic quasi-random unit directions (Box–Muller over a Halton
/// sequence), preceded by the coordinate axes.
fn quasi_directions(n: usize, count: usize, burn: u64) -> Vec<Vec<f64>> {
    let bases = halton_bases(2);
    let mut counter = burn;
    let mut normal = move || {
        let h = halton_point(counter, &bases);
        counter += 1;
        (-2.0 * h[0].max(1e-12).ln()).sqrt() * (2.0 * core::f64::consts::PI * h[1]).cos()
    };
    let mut dirs = Vec::with_capacity(count + n);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        dirs.push(e);
    }
    let mut made = 0;
    while made < count {
        let raw: Vec<f64> = (0..n).map(|_| normal()).collect();
        let norm = geom::norm(&raw);
        if norm > 1e-9 {
            dirs.push(raw.iter().map(|c| c / norm).collect());
            made += 1;
        }
    }
    dirs
}

/// Taylor coefficients (degree 6) of the bump part along `t -> node + t v`:
/// `amplitude * q(t)^3` with `q(t) = 1 - |node + t v - center|²/R²`; all
/// zero outside the support.
fn bump_direction_coeffs(
    center: &[f64],
    radius: f64,
    amplitude: f64,
    node: &[f64],
    v: &[f64],
) -> [f64; 7] {
    let w = geom::sub(node, center);
    let r2 = radius * radius;
    let q = [
        1.0 - geom::dot(&w, &w) / r2,
        -2.0 * geom::dot(&w, v) / r2,
        -1.0 / r2,
    ];
    if q[0] <= 0.0 {
        return [0.0; 7];
    }
    let mut sq = [0.0; 5];
    for i in 0..3 {
        for k in 0..3 {
            sq[i + k] += q[i] * q[k];
        }
    }
    let mut cube = [0.0; 7];
    for i in 0..5 {
        for k in 0..3 {
            cube[i + k] += sq[i] * q[k];
        }
    }
    for c in &mut cube {
        *c *= amplitude;
    }
    cube
}

#[inline]
fn factorial(i: usize) -> f64 {
    (1..=i).map(|k| k as f64).product()
}

// ---------------------------------------------------------------------------
// Threshold dimension
// ---------------------------------------------------------------------------

/// Threshold frame dimension for `(n, p)`: `n - floor(alpha_p)` when
/// `alpha_p` is not an integer, else `n - alpha_p + 1`.
pub fn k_threshold(n: usize, p: f64) -> Result<usize> {
    Ok(ProblemParams::new(n, p)?.k_threshold())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_singular_solution, sample_to_grid, AffineBump};
    use crate::quad::{halton_bases, halton_point};

    fn point_model() -> Field {
        let params = ProblemParams::new(5, 2.5).unwrap();
        Field::Analytic(make_singular_solution(params, 0, vec![0.0; 5], Vec::new()).unwrap())
    }

    fn cylinder_model() -> Field {
        let params = ProblemParams::new(6, 3.0).unwrap();
        let mut frame = vec![0.0; 6];
        frame[0] = 1.0;
        Field::Analytic(make_singular_solution(params, 1, vec![0.0; 6], frame).unwrap())
    }

    #[test]
    fn spine_directions_are_exactly_invariant() {
        let u = cylinder_model();
        let axis = {
            let mut v = vec![0.0; 6];
            v[0] = 1.0;
            v
        };
        // On the axis and off it, the gradient has no axis component, so
        // the assembled matrix annihilates the axis exactly.
        let on = invariance_deficit(&u, &axis, &[0.0; 6], 0.5).unwrap();
        assert_eq!(on, 0.0);
        let mut x_off = vec![0.0; 6];
        x_off[1] = 0.7;
        let off = invariance_deficit(&u, &axis, &x_off, 0.3).unwrap();
        assert_eq!(off, 0.0);
    }

    #[test]
    fn point_model_axis_deficit_matches_closed_form() {
        // For u = c0 |y|^{-alpha} centred at the origin, the deficit along
        // any single coordinate axis is the full gradient trace divided by
        // n; the trace integral is elementary:
        //   r^{alpha_p - n} ∫_{B_r} |∇u|² = c0² alpha² sigma_n / (n - alpha_p),
        // independent of r.  Independent constants: c0² = (20/9)^{4/3},
        // alpha² = 16/9, sigma_5 = 8 pi²/3, n - alpha_p = 1/3.
        let u = point_model();
        let e1 = {
            let mut v = vec![0.0; 5];
            v[0] = 1.0;
            v
        };
        let expected = (20.0f64 / 9.0).powf(4.0 / 3.0) * (16.0 / 9.0) * (8.0
            * core::f64::consts::PI
            * core::f64::consts::PI
            / 3.0)
            * 3.0
            / 5.0;
        let got = invariance_deficit(&u, &e1, &[0.0; 5], 0.5).unwrap();
        assert!(got > 0.0);
        assert!(
            (got - expected).abs() <= 1e-10 * expected,
            "axis deficit {got} vs closed form {expected}"
        );
        // Scale invariance of the homogeneous model.
        let other = invariance_deficit(&u, &e1, &[0.0; 5], 0.25).unwrap();
        assert!((other - got).abs() <= 1e-12 * got);
    }

    #[test]
    fn off_spine_matrix_trace_identity() {
        // A + (nu - 1) B must equal the direct trace integral
        // c0² alpha² I[d^{-alpha_p}]; checks the axial decomposition.
        let params = ProblemParams::new(5, 2.5).unwrap();
        let Field::Analytic(AnalyticField::PowerLawSingular(f)) = point_model() else {
            unreachable!()
        };
        let mut x = vec![0.0; 5];
        x[0] = 0.6;
        let r = 0.3;
        let policy = QuadraturePolicy::default();
        let g = gradient_moment_matrix(&point_model(), &x, r, &policy).unwrap();
        let trace: f64 = (0..5).map(|i| g[i * 5 + i]).sum();
        let alpha_p = params.alpha_p();
        let direct = reduced_ball_integral(
            geometry_for(5, 0, 0.6, r),
            policy.reduced,
            &[],
            |pt| pt.d.powf(-alpha_p),
        )
        .unwrap();
        let c2a2 = f.c0 * f.c0 * params.alpha() * params.alpha();
        let expected = c2a2 * r.powf(alpha_p - 5.0) * direct;
        assert!(
            (trace - expected).abs() <= 1e-12 * expected,
            "trace {trace} vs direct {expected}"
        );
        // The gradient concentrates along the centre's radial direction.
        let a_val = g[0];
        let b_val = g[6];
        assert!(a_val > b_val, "radial {a_val} should exceed transverse {b_val}");
        assert!((g[6] - g[12]).abs() <= 1e-14 * g[6].abs());
    }

    #[test]
    fn zero_field_probe_is_fully_symmetric() {
        let params = ProblemParams::new(5, 2.5).unwrap();
        let u = Field::Analytic(AnalyticField::Zero { params });
        for k in [0usize, 2, 5] {
            let probe = probe_symmetry(&u, &[0.2; 5], 0.4, k, 1e-9).unwrap();
            assert_eq!(probe.homogeneity_deficit, 0.0);
            assert_eq!(probe.invariance_deficit, 0.0);
            assert!(probe.verdict);
        }
    }

    #[test]
    fn min_deficit_equals_eigen_tail_and_finds_the_axis() {
        let u = cylinder_model();
        let x = [0.0; 6];
        let r = 0.4;
        let policy = QuadraturePolicy::default();
        let g = gradient_moment_matrix(&u, &x, r, &policy).unwrap();
        let eig = symmetric_eigen(&g, 6);
        for k in 1..=6usize {
            let (value, frame) = min_invariance_deficit(&u, &x, r, k).unwrap();
            let tail: f64 = eig.values[6 - k..].iter().sum();
            assert!(
                (value - tail).abs() <= 1e-12 * tail.max(1.0),
                "k={k}: min {value} vs eigen tail {tail}"
            );
            assert_eq!(frame.k(), k);
            assert_eq!(frame.base(), &x);
        }
        // k = 1 finds the axis with exactly zero deficit.
        let (v1, frame1) = min_invariance_deficit(&u, &x, r, 1).unwrap();
        assert_eq!(v1, 0.0);
        assert!((frame1.frame()[0] - 1.0).abs() < 1e-12, "axis frame: {:?}", frame1.frame());
        // k = n is the full trace and positive.
        let (vn, _) = min_invariance_deficit(&u, &x, r, 6).unwrap();
        let trace: f64 = (0..6).map(|i| g[i * 6 + i]).sum();
        assert!(vn > 0.0);
        assert!((vn - trace).abs() <= 1e-12 * trace);
    }

    #[test]
    fn min_deficit_matches_bruteforce_frames() {
        // Independent minimization route: 10^4 orthonormalized
        // quasi-random frames plus shrinking-perturbation polish, against
        // the precomputed moment matrix.
        let u = point_model();
        let mut x = vec![0.0; 5];
        x[0] = 0.6;
        let r = 0.3;
        let policy = QuadraturePolicy::default();
        let g = gradient_moment_matrix(&u, &x, r, &policy).unwrap();
        let n = 5;
        let objective = |frame: &[f64]| quadratic_trace(&g, frame, n);

        let gauss = halton_bases(2);
        let mut counter = 1u64;
        let mut normal = || {
            let h = halton_point(counter, &gauss);
            counter += 1;
            (-2.0 * h[0].max(1e-12).ln()).sqrt()
                * (2.0 * core::f64::consts::PI * h[1]).cos()
        };
        for k in [1usize, 2] {
            let (exact, _) = min_invariance_deficit(&u, &x, r, k).unwrap();
            let mut best = f64::INFINITY;
            let mut best_frame = Vec::new();
            for _ in 0..10_000 {
                let raw: Vec<f64> = (0..k * n).map(|_| normal()).collect();
                let frame = geom::orthonormalize(&raw, n, 1e-9);
                if frame.len() != k * n {
                    continue;
                }
                let v = objective(&frame);
                if v < best {
                    best = v;
                    best_frame = frame;
                }
            }
            let mut delta = 0.2;
            while delta > 1e-7 {
                let mut improved = false;
                for row in 0..k {
                    for axis in 0..n {
                        for sign in [1.0, -1.0] {
                            let mut raw = best_frame.clone();
                            raw[row * n + axis] += sign * delta;
                            let cand = geom::orthonormalize(&raw, n, 1e-9);
                            if cand.len() != k * n {
                                continue;
                            }
                            let v = objective(&cand);
                            if v < best {
                                best = v;
                                best_frame = cand;
                                improved = true;
                            }
                        }
                    }
                }
                if !improved {
                    delta *= 0.5;
                }
            }
            assert!(
                best >= exact - 1e-9,
                "frame search beat the eigen minimum: {best} < {exact}"
            );
            assert!(
                (best - exact).abs() <= 1e-3 * exact.abs() + 1e-9,
                "k={k}: brute {best} vs eigen {exact}"
            );
        }
    }

    #[test]
    fn probe_verdicts_on_the_models() {
        // Point model at its centre: 0-symmetric at every scale...
        let u = point_model();
        for r in [0.1, 0.3] {
            let probe = probe_symmetry(&u, &[0.0; 5], r, 0, 1e-6).unwrap();
            assert!(probe.verdict, "gap {}", probe.homogeneity_deficit);
            assert!(probe.homogeneity_deficit >= -1e-9);
        }
        // ...but never 1-symmetric: the minimal line deficit is order one.
        let probe = probe_symmetry(&u, &[0.0; 5], 0.2, 1, 1e-3).unwrap();
        assert!(!probe.verdict);
        assert!(probe.invariance_deficit > 1.0);
        // Cylinder at an axis point: both conditions vanish identically at
        // k = 1.
        let cyl = cylinder_model();
        let probe = probe_symmetry(&cyl, &[0.0; 6], 0.25, 1, 1e-6).unwrap();
        assert!(probe.verdict);
        assert!(probe.homogeneity_deficit.abs() <= 1e-9);
        assert_eq!(probe.invariance_deficit, 0.0);
    }

    #[test]
    fn cone_splitting_witness() {
        // Vanishing radial deficit at two distinct points plus vanishing
        // invariance along their difference: the quantitative shadow of
        // cone splitting, exact for the cylinder along its axis.
        let u = cylinder_model();
        let x0 = [0.0; 6];
        let mut x1 = [0.0; 6];
        x1[0] = 0.4;
        let s = 0.05;
        assert_eq!(density::radial_deficit(&u, &x0, s).unwrap(), 0.0);
        assert_eq!(density::radial_deficit(&u, &x1, s).unwrap(), 0.0);
        let span: Vec<f64> = {
            let diff = geom::sub(&x1, &x0);
            let norm = geom::norm(&diff);
            diff.iter().map(|c| c / norm).collect()
        };
        assert_eq!(invariance_deficit(&u, &span, &x0, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn membership_on_the_point_model() {
        let u = point_model();
        // The homogeneity centre is never 1-symmetric at any scale: the
        // line deficit is scale-independent and order one.
        let m = stratum_membership(&u, &[0.0; 5], 0, 1e-2, 0.05).unwrap();
        assert_eq!(m, Membership::In);
        // Near a regular point the small-scale probes become symmetric
        // (the gap decays like s^{alpha_p - 2}, crossing eps near
        // s ~ 2e-3 at this distance).
        let mut x = vec![0.0; 5];
        x[0] = 0.5;
        let m = stratum_membership(&u, &x, 0, 1e-2, 1e-3).unwrap();
        assert_eq!(m, Membership::Out);
    }

    #[test]
    fn strata_report_classifies_the_cylinder() {
        let u = cylinder_model();
        let mut points = vec![0.0; 6];
        let mut off = vec![0.0; 6];
        off[1] = 0.5;
        points.extend_from_slice(&off);
        let cfg = StrataConfig {
            eps: 1e-2,
            r_min: 2e-4,
            probe_k: None,
            reg_order: 1,
            policy: QuadraturePolicy::default(),
        };
        let report = StrataReport::compute(&u, &points, &cfg).unwrap();
        assert_eq!(report.len(), 2);
        assert_eq!(report.probe_k(), 3);
        assert!(report.check_nesting());

        // Axis point: in the m = 1 stratum and everything above, not in
        // the 0-stratum (it is 1-symmetric at every scale).
        assert_eq!(report.stratum_index()[0], Some(1));
        assert_eq!(report.membership()[0][0], Membership::Out);
        for k in 1..6 {
            assert_eq!(report.membership()[0][k], Membership::In);
        }
        // Off-axis regular point: fully symmetric at small scales, so it
        // escapes every stratum.
        assert_eq!(report.stratum_index()[1], None);
        for k in 0..6 {
            assert_eq!(report.membership()[1][k], Membership::Out);
        }
        // Probe records carry the shared data consistently.
        for probe in &report.probes()[0] {
            assert_eq!(probe.k, 3);
            assert!(probe.homogeneity_deficit.abs() <= 1e-8);
            assert!(probe.invariance_deficit > cfg.eps);
            assert!(!probe.verdict);
        }
        // Regularity scales: zero on the singular axis, positive off it.
        assert!(report.regularity_scales()[0] <= 1e-8);
        assert!(report.regularity_scales()[1] > 0.05);
        assert!(report.regularity_scales()[1] < 0.5);
    }

    #[test]
    fn gap_decay_along_dyadic_scans() {
        // Pigeonhole along a dyadic scan: the smallest gap is at most the
        // total density drop divided by the number of levels, and the
        // fitted constant  max_y (min gap) * ln(1/r0)  stays below a
        // documented bound (measured 1.286 on this probe set; ~2x
        // headroom).
        const FITTED_GAP_CONSTANT: f64 = 2.5;
        let u = point_model();
        let r0 = 0.5f64.powi(8);
        let levels = 7usize;
        let probes: [[f64; 5]; 3] = [
            [0.0; 5],
            [0.3, 0.0, 0.0, 0.0, 0.0],
            [0.2, -0.25, 0.1, 0.0, 0.0],
        ];
        let mut fitted = 0.0f64;
        for y in probes {
            let mut min_gap = f64::INFINITY;
            let mut total = 0.0;
            for jl in 0..levels {
                let s = r0 * 2.0f64.powi(jl as i32);
                let gap = density::density_gap(&u, &y, s).unwrap();
                min_gap = min_gap.min(gap);
                total += gap;
            }
            assert!(
                min_gap <= total / levels as f64 + 1e-12,
                "pigeonhole failed: min {min_gap} vs mean {}",
                total / levels as f64
            );
            fitted = fitted.max(min_gap * (1.0 / r0).ln());
        }
        assert!(
            fitted <= FITTED_GAP_CONSTANT,
            "fitted gap constant {fitted} exceeds the documented bound"
        );
    }

    #[test]
    fn regularity_scale_examples() {
        let params = ProblemParams::new(5, 2.5).unwrap();
        let zero = Field::Analytic(AnalyticField::Zero { params });
        assert_eq!(regularity_scale(&zero, &[0.0; 5], 2).unwrap(), 1.0);

        let u = point_model();
        // Singular point: the sup is infinite at every scale.
        assert!(regularity_scale(&u, &[0.0; 5], 0).unwrap() <= tolerances::BISECTION_WIDTH);

        // Off the singularity at distance d, order 0: the condition
        // c0 (d - r)^{-alpha} <= r^{-alpha} has the closed-form root
        // r* = d / (1 + c0^{1/alpha}).
        let d = 0.5;
        let mut x = vec![0.0; 5];
        x[0] = d;
        let c0 = (20.0f64 / 9.0).powf(2.0 / 3.0);
        let root = d / (1.0 + c0.powf(3.0 / 4.0));
        let got = regularity_scale(&u, &x, 0).unwrap();
        assert!(
            (got - root).abs() <= 1e-6,
            "bisection {got} vs closed-form root {root}"
        );
        // Higher orders only tighten the condition.
        let r0 = regularity_scale(&u, &x, 0).unwrap();
        let r1 = regularity_scale(&u, &x, 1).unwrap();
        let r2 = regularity_scale(&u, &x, 2).unwrap();
        assert!(r1 <= r0 + 1e-9 && r2 <= r1 + 1e-9, "{r0} {r1} {r2}");
        assert!(r2 > 0.0);
    }

    #[test]
    fn regularity_scale_handles_bounded_fields_and_grids() {
        let params = ProblemParams::new(5, 2.5).unwrap();
        // Gentle enough that the full derivative sum (factorials included)
        // stays below the critical profile at scale 1.
        let bump = Field::Analytic(AnalyticField::AffineBump(AffineBump {
            params,
            center: vec![0.0; 5],
            offset: 0.05,
            slope: vec![0.01, 0.0, 0.0, 0.0, 0.0],
            amplitude: 1e-4,
            radius: 1.0,
        }));
        assert_eq!(regularity_scale(&bump, &[0.0; 5], 2).unwrap(), 1.0);
        // Derivative orders beyond the polynomial degree change nothing.
        assert_eq!(regularity_scale(&bump, &[0.0; 5], 7).unwrap(), 1.0);

        let analytic = make_singular_solution(params, 0, vec![0.0; 5], Vec::new()).unwrap();
        let gf = sample_to_grid(&analytic, vec![0.7; 5], 0.05, vec![20; 5]).unwrap();
        let grid = Field::Grid(gf);
        let x = vec![1.2; 5];
        let scale = regularity_scale(&grid, &x, 1).unwrap();
        // The box caps the scale well below 1; the value stays positive.
        assert!(scale > 0.0 && scale < 0.6, "grid scale {scale}");
        assert!(matches!(
            regularity_scale(&grid, &x, 3),
            Err(Error::UnsupportedOrder { j: 3, max: 2 })
        ));
    }

    #[test]
    fn grid_deficit_tracks_the_analytic_value() {
        let params = ProblemParams::new(5, 2.5).unwrap();
        let analytic = make_singular_solution(params, 0, vec![0.0; 5], Vec::new()).unwrap();
        let gf = sample_to_grid(&analytic, vec![0.7; 5], 0.05, vec![20; 5]).unwrap();
        let u = Field::Analytic(analytic);
        let grid = Field::Grid(gf);
        let x = vec![1.2; 5];
        let r = 0.35;
        let e1 = {
            let mut v = vec![0.0; 5];
            v[0] = 1.0;
            v
        };
        let exact = invariance_deficit(&u, &e1, &x, r).unwrap();
        let approx = invariance_deficit(&grid, &e1, &x, r).unwrap();
        let rel = (approx - exact).abs() / exact;
        // Midpoint boundary error at ~7 cells per radius.
        assert!(rel < 0.06, "grid moment defect {rel}");
    }

    #[test]
    fn membership_is_undetermined_when_scales_skip() {
        // A small box: every dyadic scale either exits the box or holds
        // too few cells, so no classification is claimed.
        let params = ProblemParams::new(5, 2.5).unwrap();
        let analytic = make_singular_solution(params, 0, vec![0.0; 5], Vec::new()).unwrap();
        let gf = sample_to_grid(&analytic, vec![-1.625; 5], 0.25, vec![13; 5]).unwrap();
        let grid = Field::Grid(gf);
        let m = stratum_membership(&grid, &[0.6, 0.0, 0.0, 0.0, 0.0], 0, 1e-2, 0.05).unwrap();
        assert_eq!(m, Membership::Undetermined);
    }

    #[test]
    fn threshold_dimension_values() {
        assert_eq!(k_threshold(5, 2.5).unwrap(), 1);
        assert_eq!(k_threshold(6, 3.0).unwrap(), 3);
        assert_eq!(k_threshold(6, 3.5).unwrap(), 3);
        assert!(matches!(
            k_threshold(3, 2.0),
            Err(Error::SupercriticalityViolated { .. })
        ));
    }

    #[test]
    fn parameter_guards_fire() {
        let u = point_model();
        assert!(matches!(
            min_invariance_deficit(&u, &[0.0; 5], 0.2, 0),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            min_invariance_deficit(&u, &[0.0; 5], 0.2, 6),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            stratum_membership(&u, &[0.0; 5], 5, 1e-2, 0.1),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            stratum_membership(&u, &[0.0; 5], 0, 1e-2, 1.5),
            Err(Error::InvalidParameter { .. })
        ));
        let bad_frame = vec![0.5, 0.0, 0.0, 0.0, 0.0];
        assert!(matches!(
            invariance_deficit(&u, &bad_frame, &[0.0; 5], 0.2),
            Err(Error::BadFrame { .. })
        ));
    }
}
