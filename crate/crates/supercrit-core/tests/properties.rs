//! Randomized invariants of the library surface.
//!
//! Each property here restates, over random inputs, a law that the in-module
//! unit tests pin at hand-picked configurations: homogeneity and spine
//! invariance of the model solutions, nonnegativity of the monotonicity gap,
//! covariance of the smoothed density under blow-up, agreement between the
//! eigenvalue displacement and its search-based oracle, monotonicity of
//! moment tail sums and symmetry deficits, cutoff-profile shape constraints,
//! tube-volume monotonicity, and linear response of packing reports to mass
//! rescaling.

use proptest::prelude::*;

use supercrit_core::cutoff::{CutoffPhi, PHI_AT_ZERO};
use supercrit_core::density::{self, QuadraturePolicy};
use supercrit_core::field::{make_singular_solution, Field};
use supercrit_core::geom;
use supercrit_core::measure::DiscreteMeasure;
use supercrit_core::params::ProblemParams;
use supercrit_core::reifenberg::reifenberg_check;
use supercrit_core::subspace::{displacement, displacement_bruteforce, moment_spectrum};
use supercrit_core::symmetry::min_invariance_deficit;
use supercrit_core::volume::{tube_volume, VoxelBox};

/// Point-singularity model in `R^5`.
fn point_model() -> Field {
    let params = ProblemParams::new(5, 2.5).unwrap();
    Field::Analytic(make_singular_solution(params, 0, vec![0.0; 5], Vec::new()).unwrap())
}

/// Cylinder model in `R^6` whose spine is the diagonal of the first two
/// coordinates, so invariance along it exercises genuine projections rather
/// than an axis-aligned shortcut.
fn diagonal_cylinder() -> (Field, Vec<f64>) {
    let params = ProblemParams::new(6, 3.5).unwrap();
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let spine = vec![s, s, 0.0, 0.0, 0.0, 0.0];
    let u = make_singular_solution(params, 1, vec![0.0; 6], spine.clone()).unwrap();
    (Field::Analytic(u), spine)
}

/// Weighted cloud in `R^3`: interleaved coordinates plus one weight per point.
fn cloud3() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::vec(
        (
            prop::array::uniform3(-1.0f64..1.0),
            0.1f64..2.0,
        ),
        4..12,
    )
    .prop_map(|rows| {
        let mut points = Vec::with_capacity(rows.len() * 3);
        let mut weights = Vec::with_capacity(rows.len());
        for (p, w) in rows {
            points.extend_from_slice(&p);
            weights.push(w);
        }
        (points, weights)
    })
}

/// Atoms on the unit circle in the `z = 0` plane of `R^3`, weighted as a
/// one-dimensional measure with near-maximal disjoint control radii.
fn circle_measure(m: usize) -> DiscreteMeasure {
    let chord = 2.0 * (core::f64::consts::PI / m as f64).sin();
    let w = geom::unit_ball_volume(1) * 0.495 * chord;
    let mut points = Vec::with_capacity(3 * m);
    for i in 0..m {
        let t = 2.0 * core::f64::consts::PI * i as f64 / m as f64;
        points.extend_from_slice(&[t.cos(), t.sin(), 0.0]);
    }
    DiscreteMeasure::new(3, points, vec![w; m]).unwrap()
}

/// Applies a rotation by `angle` in the `(0, 1)` coordinate plane followed by
/// a translation to every point of the interleaved array.
fn rigid_motion(points: &[f64], n: usize, angle: f64, shift: &[f64]) -> Vec<f64> {
    let (c, s) = (angle.cos(), angle.sin());
    let mut out = points.to_vec();
    for p in out.chunks_mut(n) {
        let (a, b) = (p[0], p[1]);
        p[0] = c * a - s * b;
        p[1] = s * a + c * b;
        for (d, sh) in p.iter_mut().zip(shift) {
            *d += sh;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, failure_persistence: None, ..ProptestConfig::default() })]

    /// `u(λ y) = λ^{-α} u(y)` for the point model, relative to the larger
    /// magnitude, at double precision.
    #[test]
    fn singular_model_is_homogeneous(
        y in prop::array::uniform5(-1.0f64..1.0),
        lambda in 0.1f64..10.0,
    ) {
        prop_assume!(geom::norm(&y) > 0.1);
        let u = point_model();
        let alpha = ProblemParams::new(5, 2.5).unwrap().alpha();
        let scaled: Vec<f64> = y.iter().map(|c| lambda * c).collect();
        let lhs = u.value(&scaled).unwrap();
        let rhs = lambda.powf(-alpha) * u.value(&y).unwrap();
        let scale = lhs.abs().max(rhs.abs());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale,
            "homogeneity violated: {lhs} vs {rhs}");
    }

    /// Translating along the spine direction leaves the cylinder model
    /// unchanged, even when the spine is not a coordinate axis.
    #[test]
    fn cylinder_is_invariant_along_its_spine(
        y in prop::array::uniform6(-1.0f64..1.0),
        t in -1.0f64..1.0,
    ) {
        let (u, spine) = diagonal_cylinder();
        // Distance from y to the spine line must be bounded away from the
        // singular set for a meaningful finite comparison.
        let proj: f64 = y.iter().zip(&spine).map(|(a, b)| a * b).sum();
        let transverse: Vec<f64> =
            y.iter().zip(&spine).map(|(a, b)| a - proj * b).collect();
        prop_assume!(geom::norm(&transverse) > 0.05);
        let shifted: Vec<f64> =
            y.iter().zip(&spine).map(|(a, b)| a + t * b).collect();
        let lhs = u.value(&shifted).unwrap();
        let rhs = u.value(&y).unwrap();
        let scale = lhs.abs().max(rhs.abs()).max(1e-300);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale,
            "spine invariance violated: {lhs} vs {rhs}");
    }

    /// The cutoff profile is nonnegative, bounded by its value at zero, has a
    /// nonpositive slope, and is pointwise nonincreasing.
    #[test]
    fn cutoff_profile_is_nonincreasing(t1 in 0.0f64..30.0, t2 in 0.0f64..30.0) {
        let phi = CutoffPhi::new();
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let (a, da) = phi.eval(lo).unwrap();
        let (b, db) = phi.eval(hi).unwrap();
        prop_assert!(a >= 0.0 && b >= 0.0);
        prop_assert!(a <= PHI_AT_ZERO && b <= PHI_AT_ZERO);
        prop_assert!(da <= 0.0 && db <= 0.0);
        prop_assert!(a >= b, "profile increased: phi({lo}) = {a} < phi({hi}) = {b}");
    }

    /// Moment tail sums are nonincreasing in the codimension index and end
    /// at (numerically) zero.
    #[test]
    fn moment_tail_sums_are_nonincreasing((points, weights) in cloud3()) {
        let x = points[..3].to_vec();
        let mu = DiscreteMeasure::new(3, points, weights).unwrap();
        let spec = moment_spectrum(&mu, &x, 1.5).unwrap();
        let total = spec.tail_sum(0).abs().max(1.0);
        for k in 0..3 {
            prop_assert!(spec.tail_sum(k) + 1e-12 * total >= spec.tail_sum(k + 1),
                "tail sums not monotone at k = {k}");
        }
        prop_assert!(spec.tail_sum(3).abs() <= 1e-12 * total);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    /// The eigenvalue form of the displacement agrees with the independent
    /// minimum search over sampled candidate subspaces.
    #[test]
    fn displacement_matches_bruteforce(
        (points, weights) in cloud3(),
        k in 1usize..3,
    ) {
        let x = points[..3].to_vec();
        let mu = DiscreteMeasure::new(3, points, weights).unwrap();
        let (exact, _) = displacement(&mu, &x, 1.5, k).unwrap();
        let probed = displacement_bruteforce(&mu, &x, 1.5, k, 600).unwrap();
        prop_assert!((exact - probed).abs() <= 1e-3 * exact.abs() + 1e-9,
            "displacement mismatch at k = {k}: {exact} vs {probed}");
    }

    /// Rotating and translating both the cloud and the probe center leaves
    /// the displacement value unchanged.
    #[test]
    fn displacement_is_rigid_motion_invariant(
        (points, weights) in cloud3(),
        angle in 0.0f64..core::f64::consts::TAU,
        shift in prop::array::uniform3(-2.0f64..2.0),
        k in 1usize..3,
    ) {
        let x = points[..3].to_vec();
        let moved = rigid_motion(&points, 3, angle, &shift);
        let x_moved = rigid_motion(&x, 3, angle, &shift);
        let mu = DiscreteMeasure::new(3, points, weights.clone()).unwrap();
        let nu = DiscreteMeasure::new(3, moved, weights).unwrap();
        let (before, _) = displacement(&mu, &x, 1.5, k).unwrap();
        let (after, _) = displacement(&nu, &x_moved, 1.5, k).unwrap();
        // Roundoff in the rotated coordinates is proportional to the total
        // mass, so the comparison needs an absolute floor in the same unit:
        // a cloud lying exactly on a coordinate subspace has displacement
        // exactly zero while its rotated copy keeps O(eps²) residue.
        let scale = before.abs().max(after.abs()).max(1e-3 * mu.total_mass());
        prop_assert!((before - after).abs() <= 1e-10 * scale,
            "rigid motion changed displacement: {before} vs {after}");
    }

    /// Smoothed density at scale `s r` equals the density of the blow-up
    /// `s^α u(x + s ·)` at scale `r` about the origin.
    #[test]
    fn vartheta_commutes_with_blow_up(
        x in prop::array::uniform5(-0.3f64..0.3),
        s in 0.3f64..1.2,
        r in 0.05f64..0.3,
    ) {
        let u = point_model();
        let policy = QuadraturePolicy::coarse();
        let lhs = density::vartheta_with_policy(&u, &x, s * r, &policy).unwrap();
        let blown = u.blow_up(&x, s).unwrap();
        let rhs = density::vartheta_with_policy(&blown, &[0.0; 5], r, &policy).unwrap();
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale,
            "blow-up covariance violated: {lhs} vs {rhs}");
    }

    /// The two-scale density gap is nonnegative at random probes, up to the
    /// quadrature trust bounds of the two evaluations.
    #[test]
    fn monotonicity_gap_is_nonnegative(
        x in prop::array::uniform5(-0.28f64..0.28),
        r in 0.02f64..0.15,
    ) {
        let u = point_model();
        let policy = QuadraturePolicy::coarse();
        let (lo, tol_lo) = density::vartheta_with_tol(&u, &x, r, &policy).unwrap();
        let (hi, tol_hi) = density::vartheta_with_tol(&u, &x, 2.0 * r, &policy).unwrap();
        prop_assert!(hi - lo >= -(tol_lo + tol_hi) - 1e-12,
            "gap negative beyond trust: W = {} with tol {}", hi - lo, tol_lo + tol_hi);
    }

    /// Tube volumes over a fixed grid are monotone in the radius.
    #[test]
    fn tube_volume_is_monotone_in_radius(
        rows in prop::collection::vec(prop::array::uniform3(-0.5f64..0.5), 1..5),
        r1 in 0.08f64..0.3,
        r2 in 0.08f64..0.3,
    ) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let mut points = Vec::with_capacity(rows.len() * 3);
        for p in &rows {
            points.extend_from_slice(p);
        }
        let grid = VoxelBox::cube(&[0.0; 3], 1.0, 0.01).unwrap();
        let small = tube_volume(&points, lo, &grid).unwrap();
        let large = tube_volume(&points, hi, &grid).unwrap();
        prop_assert!(small <= large,
            "tube volume decreased: {small} at r = {lo} vs {large} at r = {hi}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    /// Demanding invariance along more directions can only increase the
    /// minimal deficit: the strata are nested.
    #[test]
    fn invariance_deficit_grows_with_dimension(
        x in prop::array::uniform5(-0.4f64..0.4),
        r in 0.05f64..0.2,
    ) {
        prop_assume!(geom::norm(&x) > 0.05);
        let u = point_model();
        let mut prev = 0.0f64;
        for k in 1..5 {
            let (deficit, _) = min_invariance_deficit(&u, &x, r, k).unwrap();
            prop_assert!(deficit + 1e-15 >= prev,
                "deficit dropped at k = {k}: {deficit} < {prev}");
            prev = deficit;
        }
    }

    /// Scaling every weight by `c` scales the packing ratio by `c` and the
    /// curvature-hypothesis ratio by `c²`: the displacement is linear in the
    /// measure and is integrated against it once more.
    #[test]
    fn packing_report_is_linear_in_mass(c in 0.2f64..0.9) {
        let base = circle_measure(128);
        let scaled = DiscreteMeasure::new(
            3,
            base.points().to_vec(),
            base.weights().iter().map(|w| c * w).collect(),
        )
        .unwrap();
        let x0 = [1.0, 0.0, 0.0];
        let before = reifenberg_check(&base, 1, &x0, 0.8).unwrap();
        let after = reifenberg_check(&scaled, 1, &x0, 0.8).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
        prop_assert!(rel(after.packing_ratio, c * before.packing_ratio) <= 1e-12,
            "packing not linear in mass");
        prop_assert!(
            rel(after.max_hypothesis_ratio, c * c * before.max_hypothesis_ratio) <= 1e-9,
            "hypothesis not quadratic in mass"
        );
    }
}
