//! Centres of mass, second-moment spectra, best-fit affine subspaces, and
//! the k-dimensional displacement of a weighted point measure.
//!
//! For a measure `μ` restricted to `B_r(x)` with centre of mass `x_cm`, the
//! second-moment matrix is `M = Σ_j w_j (y_j - x_cm)(y_j - x_cm)ᵀ`.  Its
//! eigenvalues `λ_1 >= ... >= λ_n` and eigenvectors `v_1, ..., v_n` solve
//! the best-fit problem in closed form: the minimum of
//! `∫ dist²(y, L) dμ` over affine k-dimensional `L` is `Σ_{i>k} λ_i`,
//! attained at `L_k = x_cm + span{v_1, ..., v_k}`.  The k-dimensional
//! displacement is that minimum scaled by `r^{-k-2}`.
//!
//! [`displacement_bruteforce`] is the independent oracle for the closed
//! form: it minimizes over sampled candidate subspaces without touching the
//! eigensolver.
//!
//! [`pair_distance`] combines the scaled `L²` distance of two fields with a
//! truncated weak-* surrogate metric between two measures, built from a
//! fixed, reproducible family of tensor bumps at dyadic centres and scales
//! (the underlying metric's countable dense test family is not computable;
//! the surrogate is declared, not canonical).

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::float::FloatExt;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::geom;
use crate::jacobi::symmetric_eigen;
use crate::measure::DiscreteMeasure;
use crate::quad::{halton_bases, halton_point, shell_integral, GaussLegendre, SphereRule};

/// Centre of mass and second-moment eigendecomposition of a restricted
/// measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSpectrum {
    x_cm: Vec<f64>,
    eigenvalues: Vec<f64>,
    /// Row-major eigenvector rows, orthonormal, matching `eigenvalues`.
    eigenvectors: Vec<f64>,
    dim: usize,
}

impl MomentSpectrum {
    /// Centre of mass of the restricted measure.
    #[must_use]
    pub fn x_cm(&self) -> &[f64] {
        &self.x_cm
    }

    /// Eigenvalues in descending order (all nonnegative).
    #[must_use]
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// The `i`-th eigenvector row.
    #[must_use]
    pub fn eigenvector(&self, i: usize) -> &[f64] {
        &self.eigenvectors[i * self.dim..(i + 1) * self.dim]
    }

    /// Ambient dimension.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sum of the eigenvalues strictly below index `k` threshold, i.e.
    /// `Σ_{i >= k} λ_i` — the best-fit residual for k-dimensional fits.
    #[must_use]
    pub fn tail_sum(&self, k: usize) -> f64 {
        self.eigenvalues[k.min(self.dim)..].iter().sum()
    }

    /// Worst eigen-equation residual `|M v_i - λ_i v_i|` against the
    /// second-moment matrix of `mu` restricted to `B_r(x)`.
    pub fn max_eigen_residual(&self, mu: &DiscreteMeasure, x: &[f64], r: f64) -> Result<f64> {
        let restricted = mu.restrict_to_ball(x, r)?;
        let m = second_moment(&restricted, &self.x_cm);
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            let v = self.eigenvector(i);
            let mut res2 = 0.0;
            for row in 0..n {
                let mv: f64 = (0..n).map(|c| m[row * n + c] * v[c]).sum();
                let d = mv - self.eigenvalues[i] * v[row];
                res2 += d * d;
            }
            worst = worst.max(res2.sqrt());
        }
        Ok(worst)
    }
}

/// An affine subspace `base + span(frame)`; `k = 0` frames are empty and
/// the subspace is the single point `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace {
    base: Vec<f64>,
    frame: Vec<f64>,
    k: usize,
}

impl AffineSubspace {
    /// Creates a subspace after validating frame orthonormality.
    pub fn new(base: Vec<f64>, frame: Vec<f64>, k: usize) -> Result<Self> {
        let n = base.len();
        geom::check_frame(&frame, k, n)?;
        if base.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "base",
                constraint: "coordinates must be finite",
            });
        }
        Ok(Self { base, frame, k })
    }

    /// Base point.
    #[must_use]
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    /// Orthonormal frame rows (k rows of length n).
    #[must_use]
    pub fn frame(&self) -> &[f64] {
        &self.frame
    }

    /// Subspace dimension `k`.
    #[must_use]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Ambient dimension `n`.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// Distance from `y` to the subspace.
    #[must_use]
    pub fn distance(&self, y: &[f64]) -> f64 {
        geom::dist_to_affine(y, &self.base, &self.frame, self.base.len())
    }
}

/// Second-moment matrix `Σ w (y - center)(y - center)ᵀ` (row-major).
fn second_moment(mu: &DiscreteMeasure, center: &[f64]) -> Vec<f64> {
    let n = mu.dim();
    let mut m = vec![0.0; n * n];
    for (y, w) in mu.iter() {
        for i in 0..n {
            let di = y[i] - center[i];
            for j in i..n {
                let contrib = w * di * (y[j] - center[j]);
                m[i * n + j] += contrib;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            m[i * n + j] = m[j * n + i];
        }
    }
    m
}

/// Centre of mass and second-moment eigendecomposition of `mu` restricted
/// to `B_r(x)`.
///
/// Fails with [`Error::EmptyRestriction`] when the restriction carries no
/// positive mass.
pub fn moment_spectrum(mu: &DiscreteMeasure, x: &[f64], r: f64) -> Result<MomentSpectrum> {
    let restricted = mu.restrict_to_ball(x, r)?;
    let mass = restricted.total_mass();
    if mass <= 0.0 {
        return Err(Error::EmptyRestriction);
    }
    let n = mu.dim();
    let mut x_cm = vec![0.0; n];
    for (y, w) in restricted.iter() {
        for i in 0..n {
            x_cm[i] += w * y[i];
        }
    }
    for c in x_cm.iter_mut() {
        *c /= mass;
    }
    let m = second_moment(&restricted, &x_cm);
    let eig = symmetric_eigen(&m, n);
    Ok(MomentSpectrum {
        x_cm,
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
        dim: n,
    })
}

/// The k-dimensional displacement of `mu` at `(x, r)` together with its
/// minimizing affine subspace `L_k = x_cm + span{v_1, ..., v_k}`.
///
/// `value = r^{-k-2} Σ_{i>k} λ_i`; zero when `k = n`.
pub fn displacement(
    mu: &DiscreteMeasure,
    x: &[f64],
    r: f64,
    k: usize,
) -> Result<(f64, AffineSubspace)> {
    let n = mu.dim();
    if k > n {
        return Err(Error::InvalidParameter {
            name: "k",
            constraint: "subspace dimension cannot exceed the ambient dimension",
        });
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            constraint: "scale must be positive and finite",
        });
    }
    let spectrum = moment_spectrum(mu, x, r)?;
    let value = r.powi(-(k as i32) - 2) * spectrum.tail_sum(k);
    let mut frame = Vec::with_capacity(k * n);
    for i in 0..k {
        frame.extend_from_slice(spectrum.eigenvector(i));
    }
    let minimizer = AffineSubspace::new(spectrum.x_cm().to_vec(), frame, k)?;
    Ok((value, minimizer))
}

/// Independent minimum-search oracle for [`displacement`]: minimizes
/// `r^{-k-2} Σ w dist²(y, L)` over sampled candidate subspaces without
/// using the eigendecomposition.
///
/// Candidate frames come from orthonormalized quasi-random normal samples
/// (`trials` of them) plus a deterministic angular grid in dimensions up to
/// 3; candidate bases are the exact centre of mass plus small
/// perturbations.  An empty restriction integrates to zero for every
/// subspace, hence returns zero.
pub fn displacement_bruteforce(
    mu: &DiscreteMeasure,
    x: &[f64],
    r: f64,
    k: usize,
    trials: usize,
) -> Result<f64> {
    let n = mu.dim();
    if k > n {
        return Err(Error::InvalidParameter {
            name: "k",
            constraint: "subspace dimension cannot exceed the ambient dimension",
        });
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let restricted = match mu.restrict_to_ball(x, r) {
        Ok(m) => m,
        Err(Error::EmptyRestriction) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let mass = restricted.total_mass();
    if mass <= 0.0 || k == n {
        return Ok(0.0);
    }
    let mut x_cm = vec![0.0; n];
    for (y, w) in restricted.iter() {
        for i in 0..n {
            x_cm[i] += w * y[i];
        }
    }
    for c in x_cm.iter_mut() {
        *c /= mass;
    }

    // Candidate bases: the exact centre of mass plus quasi-random
    // perturbations at two small radii (the optimum for any fixed frame
    // passes through x_cm; the perturbations exercise robustness).
    let bases_q = halton_bases(n);
    let mut bases: Vec<Vec<f64>> = vec![x_cm.clone()];
    for t in 0..4u64 {
        let h = halton_point(500 + t, &bases_q);
        let delta = if t % 2 == 0 { 0.01 * r } else { 0.05 * r };
        bases.push(
            x_cm.iter()
                .zip(h.iter())
                .map(|(c, u)| c + delta * (2.0 * u - 1.0))
                .collect(),
        );
    }

    let objective = |base: &[f64], frame: &[f64]| -> f64 {
        let mut total = 0.0;
        for (y, w) in restricted.iter() {
            let d = geom::sub(y, base);
            let d2 = geom::dot(&d, &d);
            let mut along = 0.0;
            for row in frame.chunks_exact(n) {
                let c = geom::dot(row, &d);
                along += c * c;
            }
            total += w * (d2 - along).max(0.0);
        }
        total
    };

    let mut best = f64::INFINITY;
    let mut best_frame: Vec<f64> = Vec::new();
    let consider = |frame: &[f64], best: &mut f64, best_frame: &mut Vec<f64>| {
        for base in &bases {
            let v = objective(base, frame);
            if v < *best {
                *best = v;
                *best_frame = frame.to_vec();
            }
        }
    };

    // Quasi-random frames: k x n standard normals via Box-Muller over
    // Halton pairs, orthonormalized; degenerate samples are skipped.
    let gauss_bases = halton_bases(2);
    let mut counter = 1000u64;
    let mut next_normal = || {
        // Box-Muller from a low-discrepancy pair.
        let h = halton_point(counter, &gauss_bases);
        counter += 1;
        let u1 = h[0].max(1e-12);
        let u2 = h[1];
        (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos()
    };
    for _ in 0..trials {
        let raw: Vec<f64> = (0..k * n).map(|_| next_normal()).collect();
        let frame = geom::orthonormalize(&raw, n, 1e-9);
        if frame.len() != k * n {
            continue;
        }
        consider(&frame, &mut best, &mut best_frame);
    }

    // Deterministic angular grid for low dimensions: directions serve as
    // the line (k = 1) or as the normal of the plane (k = n - 1).
    if n <= 3 && k >= 1 {
        let dirs = angular_grid(n);
        for d in dirs.chunks_exact(n) {
            if k == 1 {
                consider(d, &mut best, &mut best_frame);
            }
            if k == n - 1 && n >= 2 {
                let frame = orthogonal_complement(d, n);
                if frame.len() == (n - 1) * n {
                    consider(&frame, &mut best, &mut best_frame);
                }
            }
        }
    }

    // Derivative-free polish: shrinking coordinate perturbations of the
    // best frame found, re-orthonormalized, accepted on strict improvement.
    // Uses only the objective itself, so the search stays independent of
    // the eigensolver route.  The optimal base for any fixed frame is the
    // centre of mass, so the polish pins the base there.
    if k >= 1 && best_frame.len() == k * n {
        let mut frame = best_frame;
        let mut delta = 0.2;
        let mut budget = 4000usize;
        while delta > 1e-7 && budget > 0 {
            let mut improved = false;
            'sweep: for row in 0..k {
                for axis in 0..n {
                    for sign in [1.0, -1.0] {
                        if budget == 0 {
                            break 'sweep;
                        }
                        budget -= 1;
                        let mut raw = frame.clone();
                        raw[row * n + axis] += sign * delta;
                        let cand = geom::orthonormalize(&raw, n, 1e-9);
                        if cand.len() != k * n {
                            continue;
                        }
                        let v = objective(&x_cm, &cand);
                        if v < best {
                            best = v;
                            frame = cand;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                delta *= 0.5;
            }
        }
    }

    Ok(best * r.powi(-(k as i32) - 2))
}

/// Deterministic unit directions: an angle grid on the circle for `n = 2`,
/// a spherical point set for `n = 3`.
fn angular_grid(n: usize) -> Vec<f64> {
    match n {
        2 => {
            let steps = 360;
            let mut out = Vec::with_capacity(2 * steps);
            for i in 0..steps {
                let a = core::f64::consts::PI * i as f64 / steps as f64;
                out.push(a.cos());
                out.push(a.sin());
            }
            out
        }
        3 => {
            let rule = SphereRule::new(3, 400);
            let mut out = Vec::new();
            for (omega, _) in rule.iter() {
                out.extend_from_slice(omega);
            }
            out
        }
        _ => Vec::new(),
    }
}

/// Orthonormal frame spanning the orthogonal complement of the unit vector
/// `d` (returns `(n-1) x n` rows).
fn orthogonal_complement(d: &[f64], n: usize) -> Vec<f64> {
    // Start from the standard basis with d prepended, orthonormalize, and
    // drop the leading row (= d itself).
    let mut rows = Vec::with_capacity(n * (n + 1));
    rows.extend_from_slice(d);
    for i in 0..n {
        for j in 0..n {
            rows.push(if i == j { 1.0 } else { 0.0 });
        }
    }
    let ortho = geom::orthonormalize(&rows, n, 1e-9);
    ortho[n..].to_vec()
}

/// Grassmannian-style distance between equal-dimension affine subspaces:
/// the root-sum-square of the principal angles between the linear parts,
/// plus the distance between base points measured orthogonally to `v`.
pub fn subspace_distance(v: &AffineSubspace, w: &AffineSubspace) -> Result<f64> {
    if v.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            got: w.dim(),
        });
    }
    if v.k() != w.k() {
        return Err(Error::DimensionMismatch {
            expected: v.k(),
            got: w.k(),
        });
    }
    let n = v.dim();
    let k = v.k();
    let mut angles2 = 0.0;
    if k > 0 {
        // Principal angles: singular values of A Bᵀ (k x k), via the
        // eigenvalues of its Gram matrix.
        let mut ab = vec![0.0; k * k];
        for i in 0..k {
            let vi = &v.frame()[i * n..(i + 1) * n];
            for j in 0..k {
                let wj = &w.frame()[j * n..(j + 1) * n];
                ab[i * k + j] = geom::dot(vi, wj);
            }
        }
        let mut gram = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                let mut acc = 0.0;
                for l in 0..k {
                    acc += ab[l * k + i] * ab[l * k + j];
                }
                gram[i * k + j] = acc;
            }
        }
        let eig = symmetric_eigen(&gram, k);
        for lam in eig.values {
            let sigma = lam.max(0.0).sqrt().min(1.0);
            let theta = sigma.acos();
            angles2 += theta * theta;
        }
    }
    let offset = geom::sub(w.base(), v.base());
    let rejected = geom::reject_from_frame(&offset, v.frame(), n);
    Ok(angles2.sqrt() + geom::norm(&rejected))
}

// ---------------------------------------------------------------------------
// Pair distance: scaled L² between fields + truncated weak-* surrogate
// ---------------------------------------------------------------------------

/// One tensor bump of the truncated test family.
struct TensorBump {
    center: Vec<f64>,
    scale: f64,
    amplitude: f64,
}

impl TensorBump {
    fn value(&self, y: &[f64]) -> f64 {
        let mut prod = self.amplitude;
        for (yi, ci) in y.iter().zip(self.center.iter()) {
            let t = (yi - ci) / self.scale;
            let h = 1.0 - t * t;
            if h <= 0.0 {
                return 0.0;
            }
            prod *= h * h;
        }
        prod
    }
}

/// Builds the first `count` members of the reproducible dyadic bump family
/// on `B_r(x)`: level 0 is the single bump at `x` with scale `r`; level
/// `l >= 1` adds bumps at `x ± (j/2^l) r e_a` for odd `j < 2^l`, axes in
/// order, `+` before `-`, with scale `r/2^l`.  Amplitudes normalize each
/// bump to sup <= 1 and Lipschitz constant <= 1.
fn bump_family(x: &[f64], r: f64, count: usize) -> Vec<TensorBump> {
    let n = x.len();
    // sup |d/dt (1-t^2)^2| = 16 / (3 sqrt(3)), attained at t = 1/sqrt(3).
    let l_b = 16.0 / (3.0 * 3.0f64.sqrt());
    let mut out = Vec::with_capacity(count);
    let push = |center: Vec<f64>, scale: f64, out: &mut Vec<TensorBump>| {
        let lip = l_b * (n as f64).sqrt() / scale;
        let amplitude = (1.0 / lip).min(1.0);
        out.push(TensorBump {
            center,
            scale,
            amplitude,
        });
    };
    push(x.to_vec(), r, &mut out);
    let mut level = 1u32;
    while out.len() < count && level < 32 {
        let scale = r / (1u64 << level) as f64;
        let denom = (1u64 << level) as f64;
        let mut j = 1u64;
        while j < (1u64 << level) && out.len() < count {
            for axis in 0..n {
                for sign in [1.0, -1.0] {
                    if out.len() >= count {
                        break;
                    }
                    let mut c = x.to_vec();
                    c[axis] += sign * (j as f64 / denom) * r;
                    push(c, scale, &mut out);
                }
            }
            j += 2;
        }
        level += 1;
    }
    out
}

/// Truncated weak-* surrogate distance between two measures on `B_r(x)`:
/// `Σ_{i=1}^{count} 2^{-i} |∫ f_i dμ - ∫ f_i dν|` over the fixed bump
/// family (points outside the ball do not contribute).
fn measure_surrogate_distance(
    mu: &DiscreteMeasure,
    eta: &DiscreteMeasure,
    x: &[f64],
    r: f64,
    count: usize,
) -> f64 {
    let family = bump_family(x, r, count);
    let mut total = 0.0;
    let mut weight = 0.5;
    for f in &family {
        let mut diff = 0.0;
        for (y, w) in mu.iter() {
            if geom::dist(y, x) <= r {
                diff += w * f.value(y);
            }
        }
        for (y, w) in eta.iter() {
            if geom::dist(y, x) <= r {
                diff -= w * f.value(y);
            }
        }
        total += weight * diff.abs();
        weight *= 0.5;
    }
    total
}

/// Distance between two field/measure pairs on `B_r(x)`:
/// `r^{alpha_p - n - 2} ∫_{B_r(x)} |u - v|²` plus the truncated weak-*
/// surrogate between the measures.
pub fn pair_distance(
    u: &Field,
    mu: &DiscreteMeasure,
    v: &Field,
    eta: &DiscreteMeasure,
    x: &[f64],
    r: f64,
) -> Result<f64> {
    pair_distance_with_bumps(u, mu, v, eta, x, r, 64)
}

/// [`pair_distance`] with an explicit truncation length for the bump
/// family (the oracle re-evaluates at 256).
pub fn pair_distance_with_bumps(
    u: &Field,
    mu: &DiscreteMeasure,
    v: &Field,
    eta: &DiscreteMeasure,
    x: &[f64],
    r: f64,
    bumps: usize,
) -> Result<f64> {
    let n = u.dim();
    if v.dim() != n || mu.dim() != n || eta.dim() != n || x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.dim().max(mu.dim()).max(eta.dim()).max(x.len()),
        });
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            constraint: "scale must be positive and finite",
        });
    }
    if !u.contains_ball(x, r) || !v.contains_ball(x, r) {
        return Err(Error::OutOfDomain {
            what: "pair distance needs B_r(x) inside both field domains",
        });
    }
    let params = u.params();
    let scale = r.powf(params.alpha_p() - n as f64 - 2.0);
    let field_part = if u == v {
        // Identical fields: the L² term is exactly zero; skip quadrature so
        // reflexivity holds to the bit.
        0.0
    } else {
        let gl = GaussLegendre::new(64);
        let sphere = SphereRule::new(n, 2048);
        let mut err: Option<Error> = None;
        let integral = shell_integral(x, 0.0, r, &gl, &sphere, |y, _| {
            if err.is_some() {
                return 0.0;
            }
            match (u.value(y), v.value(y)) {
                (Ok(a), Ok(b)) => (a - b) * (a - b),
                (Err(e), _) | (_, Err(e)) => {
                    err = Some(e);
                    0.0
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if !integral.is_finite() {
            return Err(Error::NonFiniteIntegrand);
        }
        scale * integral
    };
    Ok(field_part + measure_surrogate_distance(mu, eta, x, r, bumps))
}
