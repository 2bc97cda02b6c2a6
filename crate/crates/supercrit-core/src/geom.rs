//! Small dense linear-algebra helpers on `&[f64]` vectors.
//!
//! The ambient dimension in this crate is small (3–8) and known at run time,
//! so everything works on slices and `Vec<f64>`, row-major for matrices.
//! Also hosts the closed-form ball volumes and sphere areas used to
//! normalise densities and packing ratios.

use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::float::FloatExt;

use crate::error::{Error, Result};
use crate::tolerances;

/// Euclidean dot product.  Panics only through debug assertions; callers
/// validate dimensions at API boundaries.
#[inline]
#[must_use]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Euclidean norm.
#[inline]
#[must_use]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Euclidean distance between two points.
#[inline]
#[must_use]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        s += d * d;
    }
    s.sqrt()
}

/// Squared Euclidean distance.
#[inline]
#[must_use]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        s += d * d;
    }
    s
}

/// `y = a + t * d`, returned as a new vector.
#[inline]
#[must_use]
pub fn axpy(a: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), d.len());
    let mut out = Vec::with_capacity(a.len());
    for i in 0..a.len() {
        out.push(a[i] + t * d[i]);
    }
    out
}

/// Difference `a - b` as a new vector.
#[inline]
#[must_use]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    let mut out = Vec::with_capacity(a.len());
    for i in 0..a.len() {
        out.push(a[i] - b[i]);
    }
    out
}

/// Component of `v` orthogonal to the orthonormal rows of `frame`
/// (each row of length `dim`, `frame.len()` a multiple of `dim`).
#[must_use]
pub fn reject_from_frame(v: &[f64], frame: &[f64], dim: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    for row in frame.chunks_exact(dim) {
        let c = dot(&out, row);
        for i in 0..dim {
            out[i] -= c * row[i];
        }
    }
    out
}

/// Distance from `y` to the affine subspace through `base` spanned by the
/// orthonormal rows of `frame` (`k` rows of length `dim`; `k = 0` means a
/// point).
#[must_use]
pub fn dist_to_affine(y: &[f64], base: &[f64], frame: &[f64], dim: usize) -> f64 {
    let d = sub(y, base);
    norm(&reject_from_frame(&d, frame, dim))
}

/// Modified Gram–Schmidt with re-orthogonalisation.
///
/// Consumes candidate rows in order, keeps those whose orthogonal component
/// exceeds `drop_tol`, and returns the orthonormalised rows concatenated.
/// Deterministic: no pivoting, first-come order.
#[must_use]
pub fn orthonormalize(rows: &[f64], dim: usize, drop_tol: f64) -> Vec<f64> {
    let mut kept: Vec<f64> = Vec::new();
    for row in rows.chunks_exact(dim) {
        // Two rejection passes keep the basis orthonormal to ~1e-15 even for
        // nearly dependent inputs.
        let mut w = reject_from_frame(row, &kept, dim);
        w = reject_from_frame(&w, &kept, dim);
        let nw = norm(&w);
        if nw > drop_tol {
            for x in &mut w {
                *x /= nw;
            }
            kept.extend_from_slice(&w);
        }
    }
    kept
}

/// Validates that `frame` consists of `k` orthonormal rows of length `dim`.
pub fn check_frame(frame: &[f64], k: usize, dim: usize) -> Result<()> {
    if frame.len() != k * dim {
        return Err(Error::BadFrame {
            reason: "frame has the wrong number of entries",
        });
    }
    let rows: Vec<&[f64]> = frame.chunks_exact(dim).collect();
    for (i, ri) in rows.iter().enumerate() {
        for (j, rj) in rows.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            if (dot(ri, rj) - target).abs() > tolerances::FRAME_ORTHONORMAL {
                return Err(Error::BadFrame {
                    reason: "frame rows are not orthonormal",
                });
            }
        }
    }
    Ok(())
}

/// Gamma function for the half-integer arguments that dimensional constants
/// need: `gamma_half(k)` returns `Γ(k/2)` for `k >= 1`.
///
/// Uses `Γ(1/2) = sqrt(pi)`, `Γ(1) = 1` and the recurrence
/// `Γ(x+1) = x Γ(x)`; exact to rounding for every dimension in range.
#[must_use]
pub fn gamma_half(k: usize) -> f64 {
    debug_assert!(k >= 1);
    let mut acc = if k % 2 == 1 {
        core::f64::consts::PI.sqrt()
    } else {
        1.0
    };
    // Walk up from Γ(1/2) or Γ(1) to Γ(k/2).
    let mut two_x = if k % 2 == 1 { 1 } else { 2 };
    while two_x < k {
        acc *= two_x as f64 / 2.0;
        two_x += 2;
    }
    acc
}

/// Volume of the unit ball in `R^k`: `omega_k = pi^{k/2} / Γ(k/2 + 1)`.
/// `omega_0 = 1` by convention.
#[must_use]
pub fn unit_ball_volume(k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    core::f64::consts::PI.powf(k as f64 / 2.0) / gamma_half(k + 2)
}

/// Surface area of the unit sphere `S^{k-1}` in `R^k`:
/// `sigma_{k-1} = k * omega_k`.  `sigma_0 = 2` (two points).
#[must_use]
pub fn unit_sphere_area(k: usize) -> f64 {
    debug_assert!(k >= 1);
    k as f64 * unit_ball_volume(k)
}

/// Beta function `B(a, b) = Γ(a)Γ(b)/Γ(a+b)` via `ln Γ`, for the closed-form
/// on-spine ball integrals of pure powers of the spine distance.
#[must_use]
pub fn beta_fn(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Lanczos approximation of `ln Γ(x)` for `x > 0`, accurate to ~1e-13
/// relative over the range used here (arguments in (0, 30)).
#[must_use]
pub fn ln_gamma(x: f64) -> f64 {
    // g = 7, 9-term Lanczos coefficients (standard choice).
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection: Γ(x) Γ(1-x) = pi / sin(pi x).
        let pi = core::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    for (i, &c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    let half_ln_2pi = 0.918_938_533_204_672_7;
    half_ln_2pi + (x + 0.5) * t.ln() - t + a.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn dot_norm_dist() {
        let a = [3.0, 4.0];
        let b = [0.0, 0.0];
        assert_eq!(norm(&a), 5.0);
        assert_eq!(dist(&a, &b), 5.0);
        assert_eq!(dot(&a, &a), 25.0);
    }

    #[test]
    fn orthonormalize_drops_dependent_rows() {
        // e1, 2*e1 (dependent), e1+e2 -> two orthonormal rows.
        let rows = vec![1.0, 0.0, 2.0, 0.0, 1.0, 1.0];
        let q = orthonormalize(&rows, 2, 1e-10);
        assert_eq!(q.len(), 4);
        check_frame(&q, 2, 2).unwrap();
    }

    #[test]
    fn frame_validation_rejects_non_orthonormal() {
        let frame = vec![1.0, 0.0, 1.0, 0.0];
        assert!(matches!(
            check_frame(&frame, 2, 2),
            Err(crate::Error::BadFrame { .. })
        ));
    }

    #[test]
    fn ball_volumes_match_closed_forms() {
        let pi = core::f64::consts::PI;
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-14);
        assert!((unit_ball_volume(2) - pi).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * pi / 3.0).abs() < 1e-13);
        assert!((unit_ball_volume(5) - 8.0 * pi * pi / 15.0).abs() < 1e-13);
        assert!((unit_sphere_area(5) - 8.0 * pi * pi / 3.0).abs() < 1e-12);
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn ln_gamma_matches_known_values() {
        // Γ(1) = Γ(2) = 1, Γ(1/2) = sqrt(pi), Γ(5) = 24.
        assert!(ln_gamma(1.0).abs() < 1e-12);
        assert!(ln_gamma(2.0).abs() < 1e-12);
        let pi = core::f64::consts::PI;
        assert!((ln_gamma(0.5) - pi.sqrt().ln()).abs() < 1e-12);
        assert!((ln_gamma(5.0) - 24.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn beta_matches_gamma_half_route() {
        // B(a, b) for half-integer arguments agrees with the exact
        // half-integer gamma recurrence.
        for (ka, kb) in [(1usize, 2usize), (3, 4), (5, 3), (2, 7)] {
            let a = ka as f64 / 2.0;
            let b = kb as f64 / 2.0;
            let exact = gamma_half(ka) * gamma_half(kb) / gamma_half(ka + kb);
            assert!(
                (beta_fn(a, b) - exact).abs() <= 1e-12 * exact,
                "B({a},{b})"
            );
        }
    }

    #[test]
    fn affine_distance() {
        // Line through origin along e1 in R^3.
        let frame = [1.0, 0.0, 0.0];
        let base = [0.0, 0.0, 0.0];
        let y = [5.0, 3.0, 4.0];
        assert!((dist_to_affine(&y, &base, &frame, 3) - 5.0).abs() < 1e-14);
    }
}
