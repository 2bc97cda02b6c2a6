//! Discrete Reifenberg packing check for measures of disjoint-ball centres.
//!
//! The input measure carries one atom per ball: the atom sits at the ball
//! centre `y` and weighs `ω_k r_y^k`, so total mass is the packing content
//! the theorem controls.  [`reifenberg_check`] verifies the balls are
//! pairwise disjoint (tangency allowed), then evaluates the smallness
//! hypothesis
//!
//! ```text
//!   ∫_{B_t(x)} ( ∫_0^t D_μ^k(y, s) ds/s ) dμ(y)  ≤  δ t^k
//! ```
//!
//! on a dyadic grid: `t` runs over dyadic fractions of `r` below `r/10`,
//! the inner `ds/s` integral is discretised over dyadic `s`-levels with
//! weight `ln 2`, and the grid centres `x` are the atoms themselves — a
//! spatial lattice point away from the support sees zero mass and can
//! never attain the maximum, so probing the support loses nothing.  The
//! report records, per scale `t`, the largest hypothesis integral over
//! `x` and its ratio to `t^k`, together with the packing ratio
//! `μ(B_r(x0)) / r^k` that the theorem bounds whenever the hypothesis
//! ratios are small.
//!
//! `D_μ^k(y, s)` is the mean-squared distance of `μ` restricted to
//! `B_s(y)` from its best-fit k-dimensional affine subspace, normalised
//! by `s^{k+2}` (see [`crate::subspace::displacement`]).  Displacement
//! values are shared across the grid through a per-`(atom, scale)` cache:
//! every `s`-level that appears is a dyadic fraction of `r`, so only
//! `T_LEVELS + S_LEVELS - 1` distinct scales per atom ever arise.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::float::FloatExt;

use crate::error::{Error, Result};
use crate::geom;
use crate::measure::DiscreteMeasure;
use crate::subspace;

/// The largest examined scale is `r · 2^{-BASE_SHIFT}`, the biggest dyadic
/// fraction of `r` strictly below `r/10`.
const BASE_SHIFT: usize = 4;

/// Number of dyadic `t`-levels in the grid.
const T_LEVELS: usize = 8;

/// Number of dyadic `s`-levels discretising the inner `ds/s` integral.
const S_LEVELS: usize = 8;

/// Cap on the number of grid centres `x` per scale; larger supports are
/// subsampled with a fixed stride so the check stays deterministic.
const MAX_PROBES: usize = 512;

/// Relative slack for the disjointness test: balls may touch, and radii
/// recovered from weights by a k-th root carry a few ulps of noise.
const TANGENCY_SLACK: f64 = 1e-12;

/// Result of [`reifenberg_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct PackingReport {
    /// Subspace dimension the displacement was measured against.
    pub k: usize,
    /// Top scale of the check.
    pub r: f64,
    /// Centre of the packing ball.
    pub x0: Vec<f64>,
    /// Dyadic grid scales `t`, descending from `r / 16`.
    pub scales: Vec<f64>,
    /// Per-scale maximum over grid centres of the hypothesis integral
    /// `∫_{B_t(x)} ∫_0^t D_μ^k(y, s) ds/s dμ(y)`.
    pub scale_integrals: Vec<f64>,
    /// Per-scale `scale_integrals[j] / t_j^k`.
    pub scale_ratios: Vec<f64>,
    /// Largest entry of `scale_ratios`: the quantity that must stay below
    /// the smallness threshold for the packing bound to apply.
    pub max_hypothesis_ratio: f64,
    /// `μ(B_r(x0)) / r^k`.
    pub packing_ratio: f64,
    /// Number of `(x, t)` grid pairs examined.
    pub pairs_examined: usize,
}

impl PackingReport {
    /// Verdict: every hypothesis ratio stays below `delta`.
    #[must_use]
    pub fn hypothesis_holds(&self, delta: f64) -> bool {
        self.max_hypothesis_ratio < delta
    }

    /// Verdict: the packing ratio is at most `bound`.
    #[must_use]
    pub fn packing_bounded_by(&self, bound: f64) -> bool {
        self.packing_ratio <= bound
    }
}

/// Radii of the underlying balls, recovered from the atom weights
/// `w_y = ω_k r_y^k`.
///
/// For `k = 0` every weight is `ω_0 = 1` and the radii are not
/// recoverable; the balls degenerate to points, which are disjoint as
/// sets regardless of position, so zero radii are returned and the
/// disjointness check is vacuous.
fn ball_radii(mu: &DiscreteMeasure, k: usize) -> Vec<f64> {
    if k == 0 {
        return vec![0.0; mu.len()];
    }
    let omega = geom::unit_ball_volume(k);
    mu.weights()
        .iter()
        .map(|w| (w / omega).powf(1.0 / k as f64))
        .collect()
}

/// Errors with [`Error::OverlappingBalls`] if any two recovered balls
/// overlap; tangency is allowed.
fn check_disjoint(mu: &DiscreteMeasure, k: usize) -> Result<()> {
    let radii = ball_radii(mu, k);
    let n = mu.dim();
    let pts = mu.points();
    for i in 0..mu.len() {
        for j in (i + 1)..mu.len() {
            let d = geom::dist(&pts[i * n..(i + 1) * n], &pts[j * n..(j + 1) * n]);
            if d < (radii[i] + radii[j]) * (1.0 - TANGENCY_SLACK) {
                return Err(Error::OverlappingBalls { i, j });
            }
        }
    }
    Ok(())
}

/// Displacement `D_μ^k(y_idx, s)` with a per-`(atom, dyadic scale)` cache.
fn cached_displacement(
    mu: &DiscreteMeasure,
    y_idx: usize,
    s: f64,
    k: usize,
    slot: usize,
    cache: &mut [Option<f64>],
    slots: usize,
) -> Result<f64> {
    let idx = y_idx * slots + slot;
    if let Some(v) = cache[idx] {
        return Ok(v);
    }
    let n = mu.dim();
    let y = &mu.points()[y_idx * n..(y_idx + 1) * n];
    let v = subspace::displacement(mu, y, s, k)?.0;
    cache[idx] = Some(v);
    Ok(v)
}

/// Discrete Reifenberg check for a measure of disjoint-ball centres.
///
/// `mu` carries one atom per ball, weighted `ω_k r_y^k`.  The check
/// verifies pairwise disjointness of the recovered balls, evaluates the
/// displacement smallness hypothesis on a dyadic `(x, t)` grid with
/// `t < r/10`, and reports the packing ratio `μ(B_r(x0)) / r^k`.
///
/// # Errors
///
/// [`Error::OverlappingBalls`] when two recovered balls overlap;
/// [`Error::DimensionMismatch`] when `x0` has the wrong length;
/// [`Error::InvalidParameter`] when `k` exceeds the ambient dimension or
/// `r` is not finite and positive.  An empty measure is allowed and
/// trivially satisfies every bound: the report is all zeros.
pub fn reifenberg_check(
    mu: &DiscreteMeasure,
    k: usize,
    x0: &[f64],
    r: f64,
) -> Result<PackingReport> {
    let n = mu.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if k > n {
        return Err(Error::InvalidParameter {
            name: "k",
            constraint: "must not exceed the ambient dimension",
        });
    }
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "r",
            constraint: "must be finite and positive",
        });
    }
    check_disjoint(mu, k)?;

    let scales: Vec<f64> = (0..T_LEVELS)
        .map(|j| r * 0.5f64.powi((BASE_SHIFT + j) as i32))
        .collect();

    // Every s-level is r · 2^{-(BASE_SHIFT + j + i)}; index the cache by
    // j + i.
    let slots = T_LEVELS + S_LEVELS - 1;
    let mut cache: Vec<Option<f64>> = vec![None; mu.len() * slots];

    let pts = mu.points();
    let weights = mu.weights();
    let stride = mu.len().div_ceil(MAX_PROBES).max(1);

    let mut scale_integrals = vec![0.0; T_LEVELS];
    let mut scale_ratios = vec![0.0; T_LEVELS];
    let mut pairs_examined = 0usize;

    for (j, &t) in scales.iter().enumerate() {
        for xi in (0..mu.len()).step_by(stride) {
            pairs_examined += 1;
            let x = &pts[xi * n..(xi + 1) * n];
            let mut integral = 0.0;
            for yi in 0..mu.len() {
                let w = weights[yi];
                if w == 0.0 {
                    continue;
                }
                let y = &pts[yi * n..(yi + 1) * n];
                if geom::dist(x, y) > t {
                    continue;
                }
                let mut inner = 0.0;
                for i in 0..S_LEVELS {
                    let s = r * 0.5f64.powi((BASE_SHIFT + j + i) as i32);
                    inner += cached_displacement(mu, yi, s, k, j + i, &mut cache, slots)?;
                }
                integral += w * inner * core::f64::consts::LN_2;
            }
            if integral > scale_integrals[j] {
                scale_integrals[j] = integral;
            }
        }
        scale_ratios[j] = scale_integrals[j] / t.powi(k as i32);
    }

    let max_hypothesis_ratio = scale_ratios.iter().copied().fold(0.0, f64::max);
    let packing_ratio = mu.mass_in_ball(x0, r)? / r.powi(k as i32);

    Ok(PackingReport {
        k,
        r,
        x0: x0.to_vec(),
        scales,
        scale_integrals,
        scale_ratios,
        max_hypothesis_ratio,
        packing_ratio,
        pairs_examined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::unit_ball_volume;

    /// Centres on the x-axis with spacing `step` and equal radii `rho`,
    /// spanning `|x| <= extent`, weighted for a k = 1 check.
    fn line_measure(step: f64, rho: f64, extent: f64) -> DiscreteMeasure {
        let m = (extent / step).floor() as i64;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for i in -m..=m {
            points.extend_from_slice(&[i as f64 * step, 0.0, 0.0]);
            weights.push(unit_ball_volume(1) * rho);
        }
        DiscreteMeasure::new(3, points, weights).unwrap()
    }

    /// `m` equally spaced centres on the unit circle in the z = 0 plane,
    /// radii just under half the chord spacing, weighted for k = 1.
    fn circle_measure(m: usize) -> DiscreteMeasure {
        let chord = 2.0 * (core::f64::consts::PI / m as f64).sin();
        let rho = 0.495 * chord;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for i in 0..m {
            let theta = 2.0 * core::f64::consts::PI * i as f64 / m as f64;
            points.extend_from_slice(&[theta.cos(), theta.sin(), 0.0]);
            weights.push(unit_ball_volume(1) * rho);
        }
        DiscreteMeasure::new(3, points, weights).unwrap()
    }

    /// Square-lattice centres filling the unit disk in the z = 0 plane,
    /// weighted as if they were a k = 1 configuration — the shape the
    /// hypothesis is designed to reject.
    fn disk_measure(step: f64) -> DiscreteMeasure {
        let rho = 0.495 * step;
        let m = (1.0 / step).ceil() as i64;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for i in -m..=m {
            for j in -m..=m {
                let (x, y) = (i as f64 * step, j as f64 * step);
                if x * x + y * y <= 1.0 {
                    points.extend_from_slice(&[x, y, 0.0]);
                    weights.push(unit_ball_volume(1) * rho);
                }
            }
        }
        DiscreteMeasure::new(3, points, weights).unwrap()
    }

    #[test]
    fn axis_aligned_flat_configs_have_exactly_zero_hypothesis() {
        // A straight line of balls: every restricted second moment has
        // zero rows off the axis, so the displacement tail — and with it
        // the whole hypothesis integral — is exactly zero, while the
        // packing ratio stays near ω_1 · (mass per unit length) across
        // ten dyadic scales.
        let mu = line_measure(0.01, 0.004_95, 1.2);
        let omega1 = unit_ball_volume(1);
        for level in 0..10 {
            let r = 0.8 * 0.5f64.powi(level);
            let report = reifenberg_check(&mu, 1, &[0.0, 0.0, 0.0], r).unwrap();
            assert_eq!(report.max_hypothesis_ratio, 0.0, "level {level}");
            assert!(report.scale_integrals.iter().all(|&v| v == 0.0));
            assert!(
                report.packing_bounded_by(4.0 * omega1),
                "level {level}: packing {} too large",
                report.packing_ratio
            );
            assert!(
                report.packing_ratio >= 0.5 * omega1,
                "level {level}: packing {} degenerate",
                report.packing_ratio
            );
        }

        // A flat axis-aligned plane of balls checked as k = 2.
        let step = 0.05;
        let rho = 0.0245;
        let m = 12;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for i in -m..=m {
            for j in -m..=m {
                points.extend_from_slice(&[f64::from(i) * step, f64::from(j) * step, 0.0]);
                weights.push(unit_ball_volume(2) * rho * rho);
            }
        }
        let plane = DiscreteMeasure::new(3, points, weights).unwrap();
        let report = reifenberg_check(&plane, 2, &[0.0, 0.0, 0.0], 0.5).unwrap();
        let omega2 = unit_ball_volume(2);
        assert_eq!(report.max_hypothesis_ratio, 0.0);
        assert!(report.packing_bounded_by(4.0 * omega2));
        assert!(report.packing_ratio >= 0.5 * omega2);
    }

    #[test]
    fn circle_hypothesis_is_small_and_tracks_curvature() {
        // On a unit circle the displacement at scale s is curvature
        // driven: D ≈ (2/45) ρ_d s² for linear density ρ_d, which makes
        // the hypothesis ratio ≈ 0.082 ρ_d² t².  The compensated ratio
        // ratio / t² should therefore be scale-stable and close to that
        // constant wherever the arc is well resolved.
        let mu = circle_measure(2048);
        let report = reifenberg_check(&mu, 1, &[1.0, 0.0, 0.0], 0.8).unwrap();

        assert!(
            report.max_hypothesis_ratio < 5e-4,
            "hypothesis ratio {} not small",
            report.max_hypothesis_ratio
        );
        assert!(report.max_hypothesis_ratio > 5e-5);
        assert!(report.hypothesis_holds(5e-4));
        assert!(report.packing_bounded_by(4.0 * unit_ball_volume(1)));
        assert!(report.packing_ratio >= 1.0);

        // First three t-levels resolve ≥ 4 chord spacings each.
        let compensated: Vec<f64> = (0..3)
            .map(|j| report.scale_ratios[j] / (report.scales[j] * report.scales[j]))
            .collect();
        for c in &compensated {
            assert!(
                *c > 0.04 && *c < 0.16,
                "compensated ratio {c} off the curvature prediction"
            );
        }
        let (lo, hi) = compensated
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &c| {
                (lo.min(c), hi.max(c))
            });
        assert!(
            hi <= 2.0 * lo,
            "compensated ratios [{lo}, {hi}] drift beyond 2x"
        );
    }

    #[test]
    fn planar_blob_fails_the_line_hypothesis() {
        // A filled 2-disk weighted as a k = 1 configuration has
        // displacement growing linearly in s instead of quadratically;
        // its hypothesis ratio dwarfs both the straight line (exactly 0)
        // and the circle.
        let disk = disk_measure(0.04);
        let disk_report = reifenberg_check(&disk, 1, &[0.0, 0.0, 0.0], 0.8).unwrap();

        let circle = circle_measure(512);
        let circle_report = reifenberg_check(&circle, 1, &[1.0, 0.0, 0.0], 0.8).unwrap();

        assert!(
            disk_report.max_hypothesis_ratio > 0.5,
            "disk ratio {} unexpectedly small",
            disk_report.max_hypothesis_ratio
        );
        assert!(
            disk_report.max_hypothesis_ratio > 10.0 * circle_report.max_hypothesis_ratio,
            "disk {} vs circle {}",
            disk_report.max_hypothesis_ratio,
            circle_report.max_hypothesis_ratio
        );
    }

    #[test]
    fn disjointness_guards_and_parameter_checks() {
        let omega1 = unit_ball_volume(1);

        // Tangent balls are fine.
        let tangent = DiscreteMeasure::new(
            3,
            vec![0.0, 0.0, 0.0, 0.2, 0.0, 0.0],
            vec![omega1 * 0.1, omega1 * 0.1],
        )
        .unwrap();
        assert!(reifenberg_check(&tangent, 1, &[0.0; 3], 0.5).is_ok());

        // Overlap is rejected with the offending pair.
        let overlap = DiscreteMeasure::new(
            3,
            vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.15, 0.0, 0.0],
            vec![omega1 * 0.05, omega1 * 0.1, omega1 * 0.1],
        )
        .unwrap();
        match reifenberg_check(&overlap, 1, &[0.0; 3], 0.5) {
            Err(Error::OverlappingBalls { i, j }) => assert_eq!((i, j), (1, 2)),
            other => panic!("expected overlap error, got {other:?}"),
        }

        // k = 0 carries no radius information; distinct points pass.
        let points0 =
            DiscreteMeasure::new(3, vec![0.0, 0.0, 0.0, 0.3, 0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(reifenberg_check(&points0, 0, &[0.0; 3], 0.5).is_ok());

        // An empty measure reports zeros.
        let empty = DiscreteMeasure::new(3, Vec::new(), Vec::new()).unwrap();
        let report = reifenberg_check(&empty, 1, &[0.0; 3], 0.5).unwrap();
        assert_eq!(report.max_hypothesis_ratio, 0.0);
        assert_eq!(report.packing_ratio, 0.0);
        assert_eq!(report.pairs_examined, 0);

        // Parameter guards.
        let mu = line_measure(0.1, 0.04, 0.5);
        assert!(matches!(
            reifenberg_check(&mu, 1, &[0.0; 2], 0.5),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            reifenberg_check(&mu, 4, &[0.0; 3], 0.5),
            Err(Error::InvalidParameter { name: "k", .. })
        ));
        assert!(matches!(
            reifenberg_check(&mu, 1, &[0.0; 3], 0.0),
            Err(Error::InvalidParameter { name: "r", .. })
        ));
    }

    #[test]
    fn congruent_rescaling_leaves_ratios_invariant() {
        // Halving every length (centres, radii — hence weights — and the
        // check scale) is an exact congruence of the configuration, and
        // all reported ratios are scale-invariant under it.
        let mu = circle_measure(256);
        let half = DiscreteMeasure::new(
            3,
            mu.points().iter().map(|x| 0.5 * x).collect(),
            mu.weights().iter().map(|w| 0.5 * w).collect(),
        )
        .unwrap();

        let full_report = reifenberg_check(&mu, 1, &[1.0, 0.0, 0.0], 0.6).unwrap();
        let half_report = reifenberg_check(&half, 1, &[0.5, 0.0, 0.0], 0.3).unwrap();

        assert!(full_report.max_hypothesis_ratio > 0.0);
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1e-300);
        assert!(
            rel(
                full_report.max_hypothesis_ratio,
                half_report.max_hypothesis_ratio
            ) < 1e-9
        );
        assert!(rel(full_report.packing_ratio, half_report.packing_ratio) < 1e-9);
        for j in 0..full_report.scale_ratios.len() {
            let (a, b) = (full_report.scale_ratios[j], half_report.scale_ratios[j]);
            if a == 0.0 {
                assert_eq!(b, 0.0);
            } else {
                assert!(rel(a, b) < 1e-9, "scale {j}: {a} vs {b}");
            }
        }
    }
}
