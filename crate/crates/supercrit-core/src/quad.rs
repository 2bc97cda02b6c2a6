//! Deterministic quadrature building blocks.
//!
//! * Gauss–Legendre rules on `[-1, 1]` (nodes by Newton iteration on the
//!   Legendre recurrence, reproducible bit-for-bit);
//! * deterministic unit-sphere point sets: uniform circle (`n = 2`),
//!   Fibonacci spiral (`n = 3`), equal-measure Hopf lattice (`n = 4`), and a
//!   product-angle grid for `n >= 5`;
//! * a generic product rule over Euclidean balls combining a radial rule
//!   with a sphere set;
//! * Halton low-discrepancy sequences and their restriction to balls.
//!
//! Everything here is scale-covariant by construction: mapping a rule to a
//! ball of radius `r` scales nodes affinely and weights by the Jacobian, so
//! integrating an exactly homogeneous integrand at two radii gives exactly
//! proportional results.  Downstream constancy checks rely on this.

use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::float::FloatExt;

use crate::geom;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the `n`-point rule.  Nodes are found by Newton iteration on
    /// the three-term Legendre recurrence from the Tricomi initial guess;
    /// converges to machine precision in a handful of steps.
    #[must_use]
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let nf = n as f64;
        for i in 0..n {
            // Initial guess (roots ordered descending in cos argument).
            let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * d * d));
        }
        // Ascending order is the stable convention for interval mapping.
        nodes.reverse();
        weights.reverse();
        Self { nodes, weights }
    }

    /// Number of nodes.
    #[inline]
    #[must_use]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the rule has no nodes (never, by construction).
    #[inline]
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Iterates `(x, w)` pairs affinely mapped to `[a, b]`.
    pub fn iter_on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut s = 0.0;
        for (x, w) in self.iter_on(a, b) {
            s += w * f(x);
        }
        s
    }
}

/// Legendre polynomial `P_n(x)` and derivative via the three-term
/// recurrence; returns `(P_n, P_n')`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A deterministic point set on the unit sphere `S^{n-1}` with weights
/// summing to the sphere area `sigma_{n-1}`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    /// Ambient dimension `n`.
    pub dim: usize,
    /// Flattened unit vectors, `len = dim * count`.
    pub points: Vec<f64>,
    /// One weight per point.
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// Builds a rule with roughly `npts` points.
    ///
    /// * `n = 2`: uniform circle angles (exact for trigonometric
    ///   polynomials of degree `< npts`);
    /// * `n = 3`: Fibonacci spiral with equal weights (equal-area slices);
    /// * `n = 4`: Hopf-coordinate lattice, equal-measure in all three
    ///   parameters, equal weights;
    /// * `n >= 5`: product-angle grid with Gauss–Legendre nodes per polar
    ///   angle (the `sin` powers of the area element are folded into the
    ///   weights) and a uniform azimuth.
    #[must_use]
    pub fn new(n: usize, npts: usize) -> Self {
        assert!(n >= 2, "sphere rules need ambient dimension >= 2");
        let area = geom::unit_sphere_area(n);
        match n {
            2 => {
                let count = npts.max(4);
                let mut points = Vec::with_capacity(2 * count);
                let w = area / count as f64;
                for i in 0..count {
                    let t = 2.0 * core::f64::consts::PI * (i as f64 + 0.5) / count as f64;
                    points.push(t.cos());
                    points.push(t.sin());
                }
                Self {
                    dim: 2,
                    points,
                    weights: alloc::vec![w; count],
                }
            }
            3 => {
                // Fibonacci sphere: equal-height slices, golden-angle twist.
                let count = npts.max(8);
                let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
                let mut points = Vec::with_capacity(3 * count);
                let w = area / count as f64;
                for i in 0..count {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let t = 2.0 * core::f64::consts::PI * (i as f64 / golden);
                    points.push(r * t.cos());
                    points.push(r * t.sin());
                    points.push(z);
                }
                Self {
                    dim: 3,
                    points,
                    weights: alloc::vec![w; count],
                }
            }
            4 => {
                // Hopf coordinates: x = (sin η cos ξ1, sin η sin ξ1,
                // cos η cos ξ2, cos η sin ξ2), area element
                // sin η cos η dη dξ1 dξ2 on [0, π/2] x [0, 2π)^2.
                // Equal measure in η means η_i = asin(sqrt((i+1/2)/a)).
                let a = ((npts.max(64) as f64).cbrt().round() as usize).max(3);
                let count = a * a * a;
                let mut points = Vec::with_capacity(4 * count);
                let w = area / count as f64;
                for ie in 0..a {
                    let eta = (((ie as f64 + 0.5) / a as f64).sqrt()).asin();
                    let (se, ce) = (eta.sin(), eta.cos());
                    for i1 in 0..a {
                        let x1 = 2.0 * core::f64::consts::PI * (i1 as f64 + 0.5) / a as f64;
                        for i2 in 0..a {
                            let x2 = 2.0 * core::f64::consts::PI * (i2 as f64 + 0.5) / a as f64;
                            points.push(se * x1.cos());
                            points.push(se * x1.sin());
                            points.push(ce * x2.cos());
                            points.push(ce * x2.sin());
                        }
                    }
                }
                Self {
                    dim: 4,
                    points,
                    weights: alloc::vec![w; count],
                }
            }
            _ => Self::product_angle(n, npts),
        }
    }

    /// Product-angle grid for `n >= 5`: polar angles `θ_1..θ_{n-2}` get
    /// Gauss–Legendre nodes on `[0, π]` with the `sin^{n-1-i} θ_i` factors
    /// multiplied into the weights; the azimuth is a uniform midpoint grid.
    fn product_angle(n: usize, npts: usize) -> Self {
        // Pick a per-angle count `a` and azimuth count `2a` with
        // a^{n-2} * 2a ≈ npts.  At least 12 nodes per polar angle keeps the
        // Gauss–Legendre treatment of the entire sin^k area factors at
        // machine precision.
        let n_angles = n - 2;
        let a = ((npts.max(64) as f64 / 2.0).powf(1.0 / (n_angles as f64 + 1.0)).round()
            as usize)
            .max(12);
        let az = 2 * a;
        let gl = GaussLegendre::new(a);
        let mut theta_nodes: Vec<Vec<(f64, f64)>> = Vec::with_capacity(n_angles);
        for i in 0..n_angles {
            // Area element contributes sin^{n-2-i} θ_{i+1} for the i-th polar
            // angle (0-indexed): θ_1 carries sin^{n-2}, the last carries sin^1.
            let power = (n - 2 - i) as i32;
            let nodes: Vec<(f64, f64)> = gl
                .iter_on(0.0, core::f64::consts::PI)
                .map(|(t, w)| (t, w * t.sin().powi(power)))
                .collect();
            theta_nodes.push(nodes);
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        // Iterate the full tensor grid with an odometer over angle indices.
        let mut idx = alloc::vec![0usize; n_angles];
        loop {
            // Spherical coordinates: x_1 = cos θ_1, x_2 = sin θ_1 cos θ_2, ...
            // x_{n-1} = sin..sin cos φ, x_n = sin..sin sin φ.
            let mut prefix_sin = 1.0;
            let mut coords = alloc::vec![0.0f64; n];
            let mut w_angles = 1.0;
            for (i, &j) in idx.iter().enumerate() {
                let (t, w) = theta_nodes[i][j];
                coords[i] = prefix_sin * t.cos();
                prefix_sin *= t.sin();
                w_angles *= w;
            }
            let w_phi = 2.0 * core::f64::consts::PI / az as f64;
            for iphi in 0..az {
                let phi = 2.0 * core::f64::consts::PI * (iphi as f64 + 0.5) / az as f64;
                let mut c = coords.clone();
                c[n - 2] = prefix_sin * phi.cos();
                c[n - 1] = prefix_sin * phi.sin();
                points.extend_from_slice(&c);
                weights.push(w_angles * w_phi);
            }
            // Odometer increment.
            let mut carry = true;
            for d in (0..n_angles).rev() {
                if carry {
                    idx[d] += 1;
                    if idx[d] == theta_nodes[d].len() {
                        idx[d] = 0;
                    } else {
                        carry = false;
                    }
                }
            }
            if carry {
                break;
            }
        }
        Self {
            dim: n,
            points,
            weights,
        }
    }

    /// Number of points.
    #[inline]
    #[must_use]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// True when the rule is empty (never, by construction).
    #[inline]
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Iterates `(unit_vector, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points
            .chunks_exact(self.dim)
            .zip(self.weights.iter().copied())
    }
}

/// Integrates `f` over the ball `B_R(center)` with a radial Gauss–Legendre
/// rule (weight `ρ^{n-1}` folded in) times a sphere rule.
///
/// The integrand receives the evaluation point (a scratch slice) and the
/// radius `ρ` of its shell.
pub fn ball_integral(
    center: &[f64],
    radius: f64,
    radial: &GaussLegendre,
    sphere: &SphereRule,
    f: impl FnMut(&[f64], f64) -> f64,
) -> f64 {
    shell_integral(center, 0.0, radius, radial, sphere, f)
}

/// Integrates `f` over the spherical shell `r0 <= |y - center| <= r1`.
///
/// Same rule structure as [`ball_integral`]; callers use it to place radial
/// panel boundaries at radii where the integrand loses smoothness.
pub fn shell_integral(
    center: &[f64],
    r0: f64,
    r1: f64,
    radial: &GaussLegendre,
    sphere: &SphereRule,
    mut f: impl FnMut(&[f64], f64) -> f64,
) -> f64 {
    let n = center.len();
    debug_assert_eq!(sphere.dim, n);
    debug_assert!(0.0 <= r0 && r0 <= r1);
    let mut y = alloc::vec![0.0f64; n];
    let mut total = 0.0;
    for (rho, wr) in radial.iter_on(r0, r1) {
        let shell = wr * rho.powi(n as i32 - 1);
        let mut ssum = 0.0;
        for (omega, ws) in sphere.iter() {
            for i in 0..n {
                y[i] = center[i] + rho * omega[i];
            }
            ssum += ws * f(&y, rho);
        }
        total += shell * ssum;
    }
    total
}

/// Radical-inverse (van der Corput) value of `index` in `base`.
#[must_use]
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut frac = 1.0 / base as f64;
    while index > 0 {
        result += (index % base) as f64 * frac;
        index /= base;
        frac /= base as f64;
    }
    result
}

/// First `dim` primes, the standard Halton bases.
#[must_use]
pub fn halton_bases(dim: usize) -> Vec<u64> {
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    assert!(dim <= PRIMES.len(), "Halton bases available up to dim 16");
    PRIMES[..dim].to_vec()
}

/// `i`-th Halton point in `[0, 1)^dim` (index offset by 1 to skip the
/// origin).
#[must_use]
pub fn halton_point(i: u64, bases: &[u64]) -> Vec<f64> {
    bases.iter().map(|&b| radical_inverse(i + 1, b)).collect()
}

/// Deterministic low-discrepancy sample of `count` points in the ball
/// `B_radius(center)`, by rejection from the bounding cube.  The Halton
/// stream is indexed from `burn` so distinct calls can use disjoint
/// sub-streams.
#[must_use]
pub fn halton_ball(center: &[f64], radius: f64, count: usize, burn: u64) -> Vec<Vec<f64>> {
    let n = center.len();
    let bases = halton_bases(n);
    let mut out = Vec::with_capacity(count);
    let mut i = burn;
    while out.len() < count {
        let u = halton_point(i, &bases);
        i += 1;
        let mut p = Vec::with_capacity(n);
        let mut r2 = 0.0;
        for &c in &u {
            let x = 2.0 * c - 1.0;
            r2 += x * x;
            p.push(x);
        }
        if r2 <= 1.0 {
            for (j, x) in p.iter_mut().enumerate() {
                *x = center[j] + radius * *x;
            }
            out.push(p);
        }
    }
    out
}
