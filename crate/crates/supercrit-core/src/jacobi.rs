//! Deterministic cyclic Jacobi eigensolver for small symmetric matrices.
//!
//! Matrices here are tiny (the ambient dimension, 3–8), so the classic
//! cyclic Jacobi method is both fast and, with a fixed sweep order, exactly
//! reproducible across runs and platforms — which the byte-identical report
//! guarantee depends on.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::float::FloatExt;

use crate::tolerances;

/// Eigen-decomposition of a symmetric matrix: `values[i]` belongs to the
/// eigenvector stored in row `i` of `vectors` (row-major, `dim x dim`).
/// Eigenvalues are sorted in descending order.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Matrix dimension.
    pub dim: usize,
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Row-major orthonormal eigenvectors, row `i` pairs with `values[i]`.
    pub vectors: Vec<f64>,
}

/// Diagonalises the symmetric `dim x dim` matrix `m` (row-major; only the
/// upper triangle is read) by cyclic Jacobi sweeps in a fixed `(p, q)`
/// order.  Sweeps stop when every off-diagonal magnitude is at most
/// [`tolerances::JACOBI_OFFDIAG`] times the trace magnitude (plus a floor
/// for zero-trace matrices).
///
/// Ties and signs are canonicalised deterministically: eigenvalues are
/// sorted descending with the original diagonal index as tie-break, and
/// each eigenvector is flipped so its first nonzero coordinate (up to a
/// small threshold) is positive.
#[must_use]
pub fn symmetric_eigen(m: &[f64], dim: usize) -> SymmetricEigen {
    debug_assert_eq!(m.len(), dim * dim);
    let mut a = m.to_vec();
    // Symmetrise defensively from the upper triangle.
    for i in 0..dim {
        for j in (i + 1)..dim {
            let v = a[i * dim + j];
            a[j * dim + i] = v;
        }
    }
    let mut v = vec![0.0; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1.0;
    }
    let trace_mag: f64 = (0..dim).map(|i| a[i * dim + i].abs()).sum();
    let threshold = tolerances::JACOBI_OFFDIAG * trace_mag.max(1e-300);

    for _sweep in 0..64 {
        let mut off_max = 0.0f64;
        for p in 0..dim {
            for q in (p + 1)..dim {
                off_max = off_max.max(a[p * dim + q].abs());
            }
        }
        if off_max <= threshold {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a[p * dim + q];
                if apq.abs() <= threshold * 1e-2 {
                    continue;
                }
                let app = a[p * dim + p];
                let aqq = a[q * dim + q];
                // Classic stable rotation computation.
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Update A = J^T A J on rows/columns p, q.
                for k in 0..dim {
                    let akp = a[k * dim + p];
                    let akq = a[k * dim + q];
                    a[k * dim + p] = c * akp - s * akq;
                    a[k * dim + q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p * dim + k];
                    let aqk = a[q * dim + k];
                    a[p * dim + k] = c * apk - s * aqk;
                    a[q * dim + k] = s * apk + c * aqk;
                }
                // Accumulate the rotation into the eigenvector rows.
                for k in 0..dim {
                    let vpk = v[p * dim + k];
                    let vqk = v[q * dim + k];
                    v[p * dim + k] = c * vpk - s * vqk;
                    v[q * dim + k] = s * vpk + c * vqk;
                }
            }
        }
    }

    // Sort descending by eigenvalue, index as deterministic tie-break.
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        let di = a[i * dim + i];
        let dj = a[j * dim + j];
        dj.partial_cmp(&di)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut values = Vec::with_capacity(dim);
    let mut vectors = vec![0.0; dim * dim];
    for (row, &i) in order.iter().enumerate() {
        values.push(a[i * dim + i]);
        let src = &v[i * dim..(i + 1) * dim];
        // Sign canonicalisation: first coordinate above the noise floor is
        // made positive, so degenerate clusters still export stable vectors.
        let mut sign = 1.0;
        for &x in src {
            if x.abs() > 1e-12 {
                sign = x.signum();
                break;
            }
        }
        for (k, &x) in src.iter().enumerate() {
            vectors[row * dim + k] = sign * x;
        }
    }
    SymmetricEigen {
        dim,
        values,
        vectors,
    }
}

impl SymmetricEigen {
    /// Largest residual `|M v_i - lambda_i v_i|` over all eigenpairs, given
    /// the original matrix.
    #[must_use]
    pub fn max_residual(&self, m: &[f64]) -> f64 {
        let dim = self.dim;
        let mut worst = 0.0f64;
        for i in 0..dim {
            let vi = &self.vectors[i * dim..(i + 1) * dim];
            let mut r2 = 0.0;
            for row in 0..dim {
                let mut mv = 0.0;
                for col in 0..dim {
                    mv += m[row * dim + col] * vi[col];
                }
                let resid = mv - self.values[i] * vi[row];
                r2 += resid * resid;
            }
            worst = worst.max(r2.sqrt());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix_is_fixed_point() {
        let m = [3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0];
        let e = symmetric_eigen(&m, 3);
        assert_eq!(e.values, alloc::vec![3.0, 2.0, 1.0]);
        assert!(e.max_residual(&m) < 1e-14);
    }

    #[test]
    fn known_two_by_two() {
        // [[2, 1], [1, 2]] has eigenvalues 3 and 1.
        let m = [2.0, 1.0, 1.0, 2.0];
        let e = symmetric_eigen(&m, 2);
        assert!((e.values[0] - 3.0).abs() < 1e-13);
        assert!((e.values[1] - 1.0).abs() < 1e-13);
        // Eigenvector for 3 is (1, 1)/sqrt(2) after sign canonicalisation.
        let s = 1.0 / 2.0f64.sqrt();
        assert!((e.vectors[0] - s).abs() < 1e-12);
        assert!((e.vectors[1] - s).abs() < 1e-12);
        assert!(e.max_residual(&m) < 1e-13);
    }

    #[test]
    fn residual_scales_with_trace() {
        // A dense 5x5 Toeplitz-plus-diagonal matrix; check the residual,
        // trace preservation, ordering, and orthonormality of the basis.
        let dim = 5;
        let mut m = alloc::vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                m[i * dim + j] = 1.0 / (1.0 + (i as f64 - j as f64).abs()) + if i == j { i as f64 } else { 0.0 };
            }
        }
        let e = symmetric_eigen(&m, dim);
        let trace: f64 = (0..dim).map(|i| m[i * dim + i]).sum();
        let sum: f64 = e.values.iter().sum();
        assert!((trace - sum).abs() < 1e-12 * trace.abs().max(1.0));
        assert!(e.max_residual(&m) < 1e-12 * (e.values[0].abs() + 1.0));
        // Descending order.
        for w in e.values.windows(2) {
            assert!(w[0] >= w[1] - 1e-14);
        }
        // Orthonormal rows.
        for i in 0..dim {
            for j in 0..dim {
                let vi = &e.vectors[i * dim..(i + 1) * dim];
                let vj = &e.vectors[j * dim..(j + 1) * dim];
                let d = crate::geom::dot(vi, vj);
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((d - target).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_rows_stay_zero() {
        // Points exactly on a coordinate plane produce exact zero blocks;
        // the solver must keep those eigenvalues exactly 0.0.
        let m = [2.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0];
        let e = symmetric_eigen(&m, 3);
        assert_eq!(e.values[2], 0.0);
    }
}
