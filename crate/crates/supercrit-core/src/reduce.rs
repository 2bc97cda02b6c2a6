//! Symmetry-reduced quadrature over balls for spine-adapted integrands.
//!
//! Every density-type integral in this crate evaluates, over a ball
//! `B_R(x)`, an integrand that depends on the offset `z = y - x` only
//! through three scalars:
//!
//! * `s = |P z|` — the transverse radial coordinate (`P` projects onto the
//!   orthogonal complement of the spine directions),
//! * `cos γ` — the angle between `P z` and the fixed transverse offset
//!   `a = P(x - c)` of the ball centre from the spine (`b = |a|`),
//! * `q = |Q z|` — the radial coordinate along the spine directions,
//!
//! together with the derived quantities `d = |a + P z| =
//! sqrt(b² + s² + 2 b s cos γ)` (distance to the spine) and
//! `ρ² = s² + q² = |z|²`.  Rotational symmetry around the axis `a` inside
//! the transverse space and around the spine reduces the `n`-dimensional
//! ball integral to 1–3 iterated Gauss–Legendre integrals:
//!
//! * on-spine centre (`b = 0`), point spine (`m = 0`): 1-D in `s`;
//! * on-spine centre, extended spine: 2-D in `(s, q)`;
//! * off-spine centre, point spine: 2-D in `(s, γ)`;
//! * off-spine centre, extended spine: 3-D in `(s, γ, q)`.
//!
//! The transverse dimension `ν = n - m` is always `>= 3` here (the energy
//! integrability condition forces `ν > alpha_p > 2`), so the `γ` reduction
//! with its `sin^{ν-2} γ` area factor is always valid.
//!
//! Accuracy machinery:
//!
//! * on-spine centres absorb the integrand's known power of `s = d` exactly
//!   via the substitution `s = R τ^{1/(1+e)}` (`e` = total exponent
//!   including the volume factor);
//! * integrands that are only piecewise smooth across spheres `|z| = K`
//!   (the C² cutoff's ramp joins) declare those radii as *knots*; the rule
//!   splits its radial panels and per-`s` `q`-intervals there, restoring
//!   fast convergence;
//! * straddling balls (`0 < b <= R`) split at the spine crossing and near
//!   the antipodal angle; the remaining interior singularity converges
//!   slowly, which is exactly what the node-doubling tolerance attached by
//!   callers reports.

use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::float::FloatExt;

use crate::error::{Error, Result};
use crate::geom;
use crate::quad::GaussLegendre;

/// Node counts for the reduced rule (per panel).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReducedNodes {
    /// Transverse radial nodes.
    pub s: usize,
    /// Angular nodes for off-spine centres.
    pub gamma: usize,
    /// Spine-radial nodes for extended spines.
    pub q: usize,
}

impl Default for ReducedNodes {
    fn default() -> Self {
        // 64 radial nodes is the crate-wide default; the angular and spine
        // directions are smoother and get by with half.
        Self {
            s: 64,
            gamma: 32,
            q: 32,
        }
    }
}

impl ReducedNodes {
    /// The same rule with every count doubled (tolerance estimation).
    #[must_use]
    pub fn doubled(self) -> Self {
        Self {
            s: self.s * 2,
            gamma: self.gamma * 2,
            q: self.q * 2,
        }
    }

    /// A uniformly scaled-down rule for survey-quality evaluations.
    #[must_use]
    pub fn coarse() -> Self {
        Self {
            s: 16,
            gamma: 8,
            q: 8,
        }
    }
}

/// Evaluation point handed to reduced integrands.
#[derive(Debug, Clone, Copy)]
pub struct RPoint {
    /// Transverse radial coordinate `|P z|`.
    pub s: f64,
    /// Spine radial coordinate `|Q z|` (0 for point spines).
    pub q: f64,
    /// Cosine of the angle between `P z` and the centre offset (1 when the
    /// centre sits on the spine — the integrand must not depend on it
    /// there).
    pub cos_gamma: f64,
    /// Distance from the evaluation point to the spine.
    pub d: f64,
    /// Squared distance `|z|²` from the ball centre.
    pub rho2: f64,
}

/// Geometry of a reduced ball integral: transverse dimension, spine
/// dimension, centre offset from the spine, ball radius.
#[derive(Debug, Clone, Copy)]
pub struct ReducedGeometry {
    /// Transverse dimension `ν = n - m` (>= 3).
    pub nu: usize,
    /// Spine dimension `m`.
    pub m: usize,
    /// Distance of the ball centre from the spine.
    pub b: f64,
    /// Ball radius.
    pub radius: f64,
}

/// Builds the reduced geometry for a ball `B_R(x)` around a point at
/// transverse offset `b = |P(x - c)|` from an `m`-spine in `R^n`.
#[must_use]
pub fn geometry_for(n: usize, m: usize, b: f64, radius: f64) -> ReducedGeometry {
    ReducedGeometry {
        nu: n - m,
        m,
        b,
        radius,
    }
}

/// Splits `[0, hi]` at each `sqrt(K² - shift²)` for knot radii `K` with
/// `shift < K < sqrt(shift² + hi²)`, pushing panel boundaries into `out`
/// (cleared first; always starts with 0 and ends with `hi`).
fn knot_panels(hi: f64, shift: f64, knots: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.push(0.0);
    for &k in knots {
        let k2 = k * k - shift * shift;
        if k2 > 0.0 {
            let t = k2.sqrt();
            if t < hi * (1.0 - 1e-14) && t > hi * 1e-14 {
                out.push(t);
            }
        }
    }
    out.push(hi);
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
}

/// Integrates `g` over the ball with the given geometry.
///
/// `knots` lists radii `K` (distances from the ball centre) across which
/// `g` is allowed to lose smoothness; panels split there.  The volume
/// measure, sphere prefactors, and the `sin^{ν-2} γ` area factor are
/// handled internally.  Returns [`Error::NonFiniteIntegrand`] if the
/// accumulated value goes non-finite.
pub fn reduced_ball_integral(
    geo: ReducedGeometry,
    nodes: ReducedNodes,
    knots: &[f64],
    mut g: impl FnMut(&RPoint) -> f64,
) -> Result<f64> {
    let ReducedGeometry { nu, m, b, radius } = geo;
    debug_assert!(nu >= 3, "transverse dimension must be >= 3");
    debug_assert!(radius > 0.0);
    let on_spine = b <= 1e-14 * radius;
    let total = if on_spine {
        onplane_smooth(nu, m, radius, nodes, knots, &mut g)
    } else {
        offplane(nu, m, b, radius, nodes, knots, &mut g)
    };
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::NonFiniteIntegrand)
    }
}

/// Integrates a sum of power-law terms `Σ_j s^{β_j} g_j(s, q)` over a ball
/// centred **on** the spine, absorbing each power exactly.
///
/// Each `g_j` must be piecewise smooth with non-smoothness only across the
/// declared knot spheres; each exponent must satisfy `β_j > -ν` for
/// integrability.  This is the high-accuracy path for on-spine densities.
pub fn reduced_onplane_powers(
    nu: usize,
    m: usize,
    radius: f64,
    nodes: ReducedNodes,
    knots: &[f64],
    terms: &mut [(f64, &mut dyn FnMut(f64, f64) -> f64)],
) -> Result<f64> {
    debug_assert!(nu >= 3);
    let gl_s = GaussLegendre::new(nodes.s);
    let gl_q = GaussLegendre::new(nodes.q);
    let sigma_nu = geom::unit_sphere_area(nu);
    let mut s_panels = Vec::new();
    let mut q_panels = Vec::new();
    let mut total = 0.0;
    for (beta, g) in terms.iter_mut() {
        let e = (nu - 1) as f64 + *beta;
        if e <= -1.0 {
            return Err(Error::NonFiniteIntegrand);
        }
        // Substitution s = R τ^{1/(1+e)} turns s^e ds into
        // R^{1+e}/(1+e) dτ exactly; knots map to τ = (K/R)^{1+e}.
        let inv = 1.0 / (1.0 + e);
        let jac = radius.powf(1.0 + e) * inv;
        knot_panels(radius, 0.0, knots, &mut s_panels);
        let mut term_sum = 0.0;
        for w in s_panels.windows(2) {
            let (t0, t1) = ((w[0] / radius).powf(1.0 + e), (w[1] / radius).powf(1.0 + e));
            for (tau, wt) in gl_s.iter_on(t0, t1) {
                let s = radius * tau.powf(inv);
                let inner = if m == 0 {
                    g(s, 0.0)
                } else {
                    // ∫_0^{sqrt(R² - s²)} g(s, q) q^{m-1} dq, split at the
                    // knot crossings for this s.
                    let qmax = (radius * radius - s * s).max(0.0).sqrt();
                    if qmax == 0.0 {
                        0.0
                    } else {
                        knot_panels(qmax, s, knots, &mut q_panels);
                        let mut acc = 0.0;
                        for wq_panel in q_panels.windows(2) {
                            for (q, wq) in gl_q.iter_on(wq_panel[0], wq_panel[1]) {
                                acc += wq * g(s, q) * q.powi(m as i32 - 1);
                            }
                        }
                        acc
                    }
                };
                term_sum += wt * inner;
            }
        }
        let prefactor = if m == 0 {
            sigma_nu
        } else {
            sigma_nu * geom::unit_sphere_area(m)
        };
        total += prefactor * jac * term_sum;
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::NonFiniteIntegrand)
    }
}

/// Closed form for `∫_{B_R(x)} dist(y, spine)^{-β} dy` with `x` on the
/// spine: `σ_{ν-1} σ_{m-1} R^{n-β} B((ν-β)/2, (m+2)/2) m / (2 ... )`
/// reduces, via polar coordinates in the `(s, q)` quarter-disc, to
///
/// * `m = 0`:  `σ_{ν-1} R^{ν-β} / (ν-β)`;
/// * `m >= 1`: `σ_{ν-1} σ_{m-1} [R^{n-β}/(n-β)] · B((ν-β)/2, m/2) / 2`.
///
/// Requires `β < ν`.
#[must_use]
pub fn onplane_pure_power_integral(nu: usize, m: usize, radius: f64, beta: f64) -> f64 {
    let n = nu + m;
    let sigma_nu = geom::unit_sphere_area(nu);
    if m == 0 {
        sigma_nu * radius.powf(nu as f64 - beta) / (nu as f64 - beta)
    } else {
        let sigma_m = geom::unit_sphere_area(m);
        let angular = 0.5 * geom::beta_fn((nu as f64 - beta) / 2.0, m as f64 / 2.0);
        sigma_nu * sigma_m * radius.powf(n as f64 - beta) / (n as f64 - beta) * angular
    }
}

/// On-spine centre, smooth (knot-panelled) integrand.
fn onplane_smooth(
    nu: usize,
    m: usize,
    radius: f64,
    nodes: ReducedNodes,
    knots: &[f64],
    g: &mut impl FnMut(&RPoint) -> f64,
) -> f64 {
    let gl_s = GaussLegendre::new(nodes.s);
    let sigma_nu = geom::unit_sphere_area(nu);
    let mut s_panels = Vec::new();
    knot_panels(radius, 0.0, knots, &mut s_panels);
    if m == 0 {
        let mut acc = 0.0;
        for w in s_panels.windows(2) {
            for (s, ws) in gl_s.iter_on(w[0], w[1]) {
                let p = RPoint {
                    s,
                    q: 0.0,
                    cos_gamma: 1.0,
                    d: s,
                    rho2: s * s,
                };
                acc += ws * s.powi(nu as i32 - 1) * g(&p);
            }
        }
        sigma_nu * acc
    } else {
        let gl_q = GaussLegendre::new(nodes.q);
        let sigma_m = geom::unit_sphere_area(m);
        let mut q_panels = Vec::new();
        let mut acc = 0.0;
        // s = R sin χ keeps the q-limit sqrt(R² - s²) = R cos χ smooth;
        // knots map to χ = asin(K/R).
        let mut chi_panels: Vec<f64> = Vec::new();
        chi_panels.push(0.0);
        for &k in knots {
            if k > 0.0 && k < radius {
                chi_panels.push((k / radius).asin());
            }
        }
        chi_panels.push(core::f64::consts::FRAC_PI_2);
        chi_panels.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        for w in chi_panels.windows(2) {
            for (chi, wc) in gl_s.iter_on(w[0], w[1]) {
                let (sin_c, cos_c) = (chi.sin(), chi.cos());
                let s = radius * sin_c;
                let ds = radius * cos_c; // ds/dχ
                let qmax = radius * cos_c;
                if qmax <= 0.0 {
                    continue;
                }
                knot_panels(qmax, s, knots, &mut q_panels);
                let mut inner = 0.0;
                for wq_panel in q_panels.windows(2) {
                    for (q, wq) in gl_q.iter_on(wq_panel[0], wq_panel[1]) {
                        let p = RPoint {
                            s,
                            q,
                            cos_gamma: 1.0,
                            d: s,
                            rho2: s * s + q * q,
                        };
                        inner += wq * q.powi(m as i32 - 1) * g(&p);
                    }
                }
                acc += wc * ds * s.powi(nu as i32 - 1) * inner;
            }
        }
        sigma_nu * sigma_m * acc
    }
}

/// Off-spine centre: iterated rule in `(s, γ)` or `(s, γ, q)` with panel
/// splits at the spine crossing, the knot spheres, and near the antipodal
/// angle.
fn offplane(
    nu: usize,
    m: usize,
    b: f64,
    radius: f64,
    nodes: ReducedNodes,
    knots: &[f64],
    g: &mut impl FnMut(&RPoint) -> f64,
) -> f64 {
    let gl_s = GaussLegendre::new(nodes.s);
    let gl_gamma = GaussLegendre::new(nodes.gamma);
    let gl_q = GaussLegendre::new(nodes.q);
    // Directions in the transverse space at fixed angle γ to the axis sweep
    // a (ν-2)-sphere of area σ_{ν-2} = unit_sphere_area(ν-1).
    let sigma_ax = geom::unit_sphere_area(nu - 1);
    let sigma_m = if m == 0 {
        1.0
    } else {
        geom::unit_sphere_area(m)
    };
    let pi = core::f64::consts::PI;

    // Panels in γ: the integrand is sharpest near γ = π where the spine is
    // closest; three panels concentrate nodes there.
    let gamma_panels: [(f64, f64); 3] = [
        (0.0, 0.5 * pi),
        (0.5 * pi, 0.875 * pi),
        (0.875 * pi, pi),
    ];

    let mut acc = 0.0;
    let mut visit_s = |s: f64, ws: f64, q_panels: &[f64], acc: &mut f64| {
        let s_pow = s.powi(nu as i32 - 1);
        for &(g0, g1) in &gamma_panels {
            for (gamma, wg) in gl_gamma.iter_on(g0, g1) {
                let cg = gamma.cos();
                let d2 = b * b + s * s + 2.0 * b * s * cg;
                let d = d2.max(0.0).sqrt();
                let sin_pow = gamma.sin().powi(nu as i32 - 2);
                if m == 0 {
                    let p = RPoint {
                        s,
                        q: 0.0,
                        cos_gamma: cg,
                        d,
                        rho2: s * s,
                    };
                    *acc += ws * wg * s_pow * sin_pow * g(&p);
                } else {
                    let mut inner = 0.0;
                    for wq_panel in q_panels.windows(2) {
                        for (q, wq) in gl_q.iter_on(wq_panel[0], wq_panel[1]) {
                            let p = RPoint {
                                s,
                                q,
                                cos_gamma: cg,
                                d,
                                rho2: s * s + q * q,
                            };
                            inner += wq * q.powi(m as i32 - 1) * g(&p);
                        }
                    }
                    *acc += ws * wg * s_pow * sin_pow * inner;
                }
            }
        }
    };

    if m == 0 {
        // Plain s panels: split at the spine crossing and the knots.
        let mut panels = Vec::new();
        knot_panels(radius, 0.0, knots, &mut panels);
        if b < radius && b > 0.0 {
            panels.push(b);
            panels.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
        }
        for w in panels.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            for (s, ws) in gl_s.iter_on(w[0], w[1]) {
                visit_s(s, ws, &[], &mut acc);
            }
        }
    } else {
        // s = R sin χ; split χ at the spine crossing and knot angles.
        let mut chi_panels: Vec<f64> = Vec::new();
        chi_panels.push(0.0);
        if b < radius {
            chi_panels.push((b / radius).asin());
        }
        for &k in knots {
            if k > 0.0 && k < radius {
                chi_panels.push((k / radius).asin());
            }
        }
        chi_panels.push(core::f64::consts::FRAC_PI_2);
        chi_panels.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
        let mut q_panels = Vec::new();
        for w in chi_panels.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            for (chi, wc) in gl_s.iter_on(w[0], w[1]) {
                let (sin_c, cos_c) = (chi.sin(), chi.cos());
                let s = radius * sin_c;
                let ds = radius * cos_c;
                let qmax = radius * cos_c;
                if qmax <= 0.0 {
                    continue;
                }
                knot_panels(qmax, s, knots, &mut q_panels);
                visit_s(s, wc * ds, &q_panels, &mut acc);
            }
        }
    }
    sigma_ax * sigma_m * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{ball_integral, SphereRule};
    use crate::tolerances;

    #[test]
    fn recovers_ball_volume() {
        // F ≡ 1 integrates to ω_n R^n regardless of geometry.
        for &(n, m, b) in &[
            (5usize, 0usize, 0.0f64),
            (5, 0, 0.35),
            (5, 0, 2.0),
            (6, 1, 0.0),
            (6, 1, 0.6),
            (6, 1, 3.0),
            (7, 2, 0.4),
        ] {
            let r = 0.8;
            let geo = geometry_for(n, m, b, r);
            let v = reduced_ball_integral(geo, ReducedNodes::default(), &[], |_| 1.0).unwrap();
            let exact = geom::unit_ball_volume(n) * r.powi(n as i32);
            assert!(
                (v - exact).abs() < 1e-9 * exact,
                "volume defect for n={n} m={m} b={b}: {v} vs {exact}"
            );
        }
    }

    #[test]
    fn second_moment_matches_closed_form() {
        // ∫_{B_R} |z|² dz = σ_{n-1} R^{n+2} / (n+2), independent of b.
        for &(n, m, b) in &[(5usize, 0usize, 0.7f64), (6, 1, 0.4), (6, 1, 0.0)] {
            let r = 0.6;
            let geo = geometry_for(n, m, b, r);
            let v =
                reduced_ball_integral(geo, ReducedNodes::default(), &[], |p| p.rho2).unwrap();
            let exact = geom::unit_sphere_area(n) * r.powi(n as i32 + 2) / (n as f64 + 2.0);
            assert!(
                (v - exact).abs() < 1e-9 * exact,
                "moment defect n={n} m={m} b={b}"
            );
        }
    }

    #[test]
    fn onplane_power_rule_matches_closed_form() {
        // Pure powers of the spine distance, centre on the spine.  For odd
        // m >= 1 the q-limit sqrt(R² - s²) has a derivative kink at the
        // ball boundary worth ~1e-6 at default nodes; every real caller's
        // integrand vanishes near the boundary (cutoff support), so the
        // hard-boundary cases only need the documented looser bound.
        for &(n, m, beta, tol) in &[
            (5usize, 0usize, 14.0 / 3.0, 1e-10),
            (5, 0, 8.0 / 3.0, 1e-10),
            (6, 1, 4.0, 5e-6),
            (6, 1, 2.0, 5e-6),
            (6, 2, 3.5, 1e-10),
        ] {
            let r = 1.3;
            let nu = n - m;
            let mut g = |_s: f64, _q: f64| 1.0;
            let v = reduced_onplane_powers(
                nu,
                m,
                r,
                ReducedNodes::default(),
                &[],
                &mut [(-beta, &mut g)],
            )
            .unwrap();
            let exact = onplane_pure_power_integral(nu, m, r, beta);
            assert!(
                (v - exact).abs() < tol * exact.abs(),
                "power integral defect n={n} m={m} beta={beta}: {v} vs {exact}"
            );
        }
    }

    #[test]
    fn knots_restore_accuracy_for_piecewise_factors() {
        // A C² hinge factor vanishing beyond ρ = 0.9 r: declaring the knot
        // sphere brings the default rule within ~1e-10 of a high-node
        // reference even for odd m.
        let (n, m, beta) = (6usize, 1usize, 4.0f64);
        let r = 1.0;
        let nu = n - m;
        let cap = 0.81 * r * r;
        let hinge = |s: f64, q: f64| {
            let t = 1.0 - (s * s + q * q) / cap;
            if t > 0.0 {
                t * t * t
            } else {
                0.0
            }
        };
        let knots = [0.9 * r];
        let mut g = hinge;
        let v = reduced_onplane_powers(
            nu,
            m,
            r,
            ReducedNodes::default(),
            &knots,
            &mut [(-beta, &mut g)],
        )
        .unwrap();
        let mut g2 = hinge;
        let v_ref = reduced_onplane_powers(
            nu,
            m,
            r,
            ReducedNodes {
                s: 192,
                gamma: 8,
                q: 96,
            },
            &knots,
            &mut [(-beta, &mut g2)],
        )
        .unwrap();
        assert!(
            (v - v_ref).abs() < 1e-10 * v_ref.abs(),
            "knotted hinge defect: {v} vs {v_ref}"
        );
    }

    #[test]
    fn cross_check_against_generic_product_rule() {
        // Smooth integrand depending on both d and ρ², off-spine ball that
        // stays clear of the spine: both routes agree tightly.
        let n = 5;
        let m = 1;
        let center_offset = 1.5; // b > R = 0.5: smooth region.
        let r = 0.5;
        let geo = geometry_for(n, m, center_offset, r);
        let f_reduced = reduced_ball_integral(geo, ReducedNodes::default(), &[], |p| {
            (-(p.d * p.d)).exp() + 0.25 * p.rho2
        })
        .unwrap();

        // Generic route: spine = last axis, centre offset along e1.
        let gl = GaussLegendre::new(64);
        let sphere = SphereRule::new(n, 4096);
        let mut x = alloc::vec![0.0; n];
        x[0] = center_offset;
        let f_generic = ball_integral(&x, r, &gl, &sphere, |y, _| {
            // d² = |y'|² over the first n-1 = 4 transverse coordinates.
            let d2: f64 = y[..n - 1].iter().map(|v| v * v).sum();
            let rho2: f64 = y
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let c = if i == 0 { center_offset } else { 0.0 };
                    (v - c) * (v - c)
                })
                .sum();
            (-d2).exp() + 0.25 * rho2
        });
        let rel = (f_reduced - f_generic).abs() / f_generic.abs();
        assert!(
            rel < tolerances::QUADRATURE_CROSS_CHECK,
            "cross-check defect {rel}: {f_reduced} vs {f_generic}"
        );
    }

    #[test]
    fn straddling_ball_integrates_integrable_singularity() {
        // ∫ d^{-2} over a ball that contains spine points: compare the
        // reduced rule against a high-node reference of itself (honest
        // convergence, not exactness).
        let n = 5;
        let m = 0;
        let geo = geometry_for(n, m, 0.3, 0.5);
        let coarse =
            reduced_ball_integral(geo, ReducedNodes::default(), &[], |p| p.d.powf(-2.0))
                .unwrap();
        let fine = reduced_ball_integral(
            geo,
            ReducedNodes {
                s: 256,
                gamma: 128,
                q: 8,
            },
            &[],
            |p| p.d.powf(-2.0),
        )
        .unwrap();
        let rel = (coarse - fine).abs() / fine.abs();
        assert!(rel < 2e-3, "straddling convergence defect {rel}");
    }

    #[test]
    fn scale_covariance_is_exact() {
        // For an exactly homogeneous integrand, the rule at radius R and
        // 2R returns values in the exact scaling ratio (same nodes, scaled).
        let n = 6;
        let m = 1;
        let beta = 3.0;
        let g1 = reduced_ball_integral(
            geometry_for(n, m, 0.0, 0.4),
            ReducedNodes::default(),
            &[],
            |p| {
                if p.d == 0.0 {
                    0.0
                } else {
                    p.d.powf(-beta)
                }
            },
        )
        .unwrap();
        let g2 = reduced_ball_integral(
            geometry_for(n, m, 0.0, 0.8),
            ReducedNodes::default(),
            &[],
            |p| {
                if p.d == 0.0 {
                    0.0
                } else {
                    p.d.powf(-beta)
                }
            },
        )
        .unwrap();
        let ratio = g2 / g1;
        let exact = 2.0f64.powf(n as f64 - beta);
        assert!(
            (ratio - exact).abs() < 1e-12 * exact,
            "covariance defect: {ratio} vs {exact}"
        );
    }

    #[test]
    fn non_finite_integrands_are_caught() {
        let geo = geometry_for(5, 0, 0.0, 1.0);
        let r = reduced_ball_integral(geo, ReducedNodes::default(), &[], |p| 1.0 / (p.s - p.s));
        assert!(matches!(r, Err(Error::NonFiniteIntegrand)));
    }
}
