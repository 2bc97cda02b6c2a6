//! Scalar fields on subsets of `R^n`: closed-form model solutions and
//! grid-sampled data, with values, gradients, Hessians, blow-ups, and
//! sampling between the two representations.
//!
//! The central closed form is the singular model
//! `u(y) = c0 * dist(y, spine)^{-alpha}` for an `m`-dimensional affine spine,
//! with `c0^{p-1} = alpha (n - m - 2 - alpha)`; it solves
//! `-Δu = |u|^{p-1} u` away from the spine whenever the energy-integrability
//! condition `alpha_p < n - m` holds.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::float::FloatExt;

use crate::error::{Error, Result};
use crate::geom;
use crate::params::ProblemParams;

/// A scalar field: either a closed-form expression or sampled grid data.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    /// Closed-form field.
    Analytic(AnalyticField),
    /// Cell-centred sampled data on a regular box grid.
    Grid(GridField),
}

/// Closed-form fields.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticField {
    /// Singular model `c0 * dist(y, spine)^{-alpha}` around an
    /// `m`-dimensional affine spine.
    PowerLawSingular(PowerLawSingular),
    /// The zero field (homogeneous of every degree; useful as a trivial
    /// positive control).
    Zero {
        /// Problem parameters (fixes the ambient dimension).
        params: ProblemParams,
    },
    /// A smooth, bounded, compactly-modulated field
    /// `offset + slope . (y - center) + amplitude (1 - |y-center|^2/R^2)_+^3`;
    /// not a solution — the designated negative control.
    AffineBump(AffineBump),
}

/// Parameters of the singular model solution.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawSingular {
    /// Problem parameters.
    pub params: ProblemParams,
    /// Normalising constant `c0 > 0`.
    pub c0: f64,
    /// A point on the spine.
    pub center: Vec<f64>,
    /// Orthonormal rows spanning the spine directions (`m` rows of length
    /// `n`; empty for a point singularity).
    pub frame: Vec<f64>,
    /// Spine dimension `m`.
    pub m: usize,
}

/// Parameters of the smooth negative-control field.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineBump {
    /// Problem parameters.
    pub params: ProblemParams,
    /// Bump centre.
    pub center: Vec<f64>,
    /// Constant offset.
    pub offset: f64,
    /// Linear part applied to `y - center`.
    pub slope: Vec<f64>,
    /// Bump amplitude.
    pub amplitude: f64,
    /// Bump support radius.
    pub radius: f64,
}

/// Cell-centred samples of a field on a regular box grid.
///
/// The box is `[origin, origin + shape * spacing]` per axis; cell `i` along
/// an axis is centred at `origin + (i + 1/2) spacing`.  Values are stored
/// row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    /// Problem parameters.
    pub params: ProblemParams,
    /// Box corner.
    pub origin: Vec<f64>,
    /// Common cell edge length.
    pub spacing: f64,
    /// Cells per axis (each entry at least 3).
    pub shape: Vec<usize>,
    /// Cell-centre values, row-major.
    pub values: Vec<f64>,
    /// Sorted indices of cells whose sampled magnitude was capped.
    pub capped_cells: Vec<usize>,
}

impl PowerLawSingular {
    /// Distance from `y` to the spine, i.e. the norm of the component of
    /// `y - center` orthogonal to the spine directions.
    #[must_use]
    pub fn spine_distance(&self, y: &[f64]) -> f64 {
        let z = geom::sub(y, &self.center);
        geom::norm(&geom::reject_from_frame(&z, &self.frame, y.len()))
    }

    /// Component of `y - center` orthogonal to the spine (the "transverse"
    /// vector whose norm is the spine distance).
    #[must_use]
    pub fn transverse(&self, y: &[f64]) -> Vec<f64> {
        let z = geom::sub(y, &self.center);
        geom::reject_from_frame(&z, &self.frame, y.len())
    }

    /// Transverse dimension `nu = n - m`.
    #[must_use]
    pub fn transverse_dim(&self) -> usize {
        self.params.n() - self.m
    }
}

/// Builds the singular model solution with an `m`-dimensional spine through
/// `center` spanned by the orthonormal rows of `frame`.
///
/// Errors: [`Error::SupercriticalityViolated`] through parameter
/// construction, [`Error::EnergyNonIntegrable`] when `alpha_p >= n - m`,
/// [`Error::BadFrame`] / [`Error::DimensionMismatch`] for malformed frames.
pub fn make_singular_solution(
    params: ProblemParams,
    m: usize,
    center: Vec<f64>,
    frame: Vec<f64>,
) -> Result<AnalyticField> {
    let n = params.n();
    if center.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: center.len(),
        });
    }
    if m >= n {
        return Err(Error::InvalidParameter {
            name: "m",
            constraint: "spine dimension must be below the ambient dimension",
        });
    }
    if params.alpha_p() >= (n - m) as f64 {
        return Err(Error::EnergyNonIntegrable {
            n,
            m,
            alpha_p: params.alpha_p(),
        });
    }
    geom::check_frame(&frame, m, n)?;
    let alpha = params.alpha();
    let nu = (n - m) as f64;
    // c0^{p-1} = alpha (nu - 2 - alpha); positive because alpha_p < nu
    // implies alpha < (nu - 2)/2.
    let c0 = (alpha * (nu - 2.0 - alpha)).powf(1.0 / (params.p() - 1.0));
    Ok(AnalyticField::PowerLawSingular(PowerLawSingular {
        params,
        c0,
        center,
        frame,
        m,
    }))
}

/// Builds a power-law profile `amplitude * dist(., spine)^{-alpha}` with a
/// caller-chosen amplitude.
///
/// Solves the equation only when the amplitude equals the model constant
/// `c0` of [`make_singular_solution`]; other amplitudes are deliberate
/// negative controls for residual checks.  Same validation as the model
/// constructor, plus `amplitude > 0` and finite.
pub fn make_power_law_profile(
    params: ProblemParams,
    m: usize,
    center: Vec<f64>,
    frame: Vec<f64>,
    amplitude: f64,
) -> Result<AnalyticField> {
    if !(amplitude.is_finite() && amplitude > 0.0) {
        return Err(Error::InvalidParameter {
            name: "amplitude",
            constraint: "must be finite and positive",
        });
    }
    let mut field = make_singular_solution(params, m, center, frame)?;
    if let AnalyticField::PowerLawSingular(ref mut f) = field {
        f.c0 = amplitude;
    }
    Ok(field)
}

impl AnalyticField {
    /// Problem parameters.
    #[must_use]
    pub fn params(&self) -> &ProblemParams {
        match self {
            AnalyticField::PowerLawSingular(f) => &f.params,
            AnalyticField::Zero { params } => params,
            AnalyticField::AffineBump(f) => &f.params,
        }
    }

    /// Ambient dimension.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.params().n()
    }

    /// Field value at `y`.  Evaluating the singular model exactly on its
    /// spine yields `+inf`, which downstream quadrature guards convert into
    /// [`Error::NonFiniteIntegrand`].
    #[must_use]
    pub fn value(&self, y: &[f64]) -> f64 {
        match self {
            AnalyticField::PowerLawSingular(f) => {
                let d = f.spine_distance(y);
                f.c0 * d.powf(-f.params.alpha())
            }
            AnalyticField::Zero { .. } => 0.0,
            AnalyticField::AffineBump(f) => {
                let z = geom::sub(y, &f.center);
                let g = 1.0 - geom::dot(&z, &z) / (f.radius * f.radius);
                let bump = if g > 0.0 { f.amplitude * g * g * g } else { 0.0 };
                f.offset + geom::dot(&f.slope, &z) + bump
            }
        }
    }

    /// Gradient at `y`.
    #[must_use]
    pub fn gradient(&self, y: &[f64]) -> Vec<f64> {
        match self {
            AnalyticField::PowerLawSingular(f) => {
                let q = f.transverse(y);
                let d = geom::norm(&q);
                let alpha = f.params.alpha();
                let scale = -f.c0 * alpha * d.powf(-alpha - 2.0);
                q.iter().map(|&qi| scale * qi).collect()
            }
            AnalyticField::Zero { params } => vec![0.0; params.n()],
            AnalyticField::AffineBump(f) => {
                let z = geom::sub(y, &f.center);
                let r2 = f.radius * f.radius;
                let g = 1.0 - geom::dot(&z, &z) / r2;
                let mut grad = f.slope.clone();
                if g > 0.0 {
                    let s = -6.0 * f.amplitude * g * g / r2;
                    for (gi, &zi) in grad.iter_mut().zip(z.iter()) {
                        *gi += s * zi;
                    }
                }
                grad
            }
        }
    }

    /// Hessian at `y`, row-major `n x n`.
    #[must_use]
    pub fn hessian(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        match self {
            AnalyticField::PowerLawSingular(f) => {
                let q = f.transverse(y);
                let d = geom::norm(&q);
                let alpha = f.params.alpha();
                let c_quad = f.c0 * alpha * (alpha + 2.0) * d.powf(-alpha - 4.0);
                let c_proj = f.c0 * alpha * d.powf(-alpha - 2.0);
                // Projector onto the transverse space: P = I - sum f_i f_i^T.
                let mut h = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        let mut pij = if i == j { 1.0 } else { 0.0 };
                        for row in f.frame.chunks_exact(n) {
                            pij -= row[i] * row[j];
                        }
                        h[i * n + j] = c_quad * q[i] * q[j] - c_proj * pij;
                    }
                }
                h
            }
            AnalyticField::Zero { .. } => vec![0.0; n * n],
            AnalyticField::AffineBump(f) => {
                let z = geom::sub(y, &f.center);
                let r2 = f.radius * f.radius;
                let g = 1.0 - geom::dot(&z, &z) / r2;
                let mut h = vec![0.0; n * n];
                if g > 0.0 {
                    let diag = -6.0 * f.amplitude * g * g / r2;
                    let quad = 24.0 * f.amplitude * g / (r2 * r2);
                    for i in 0..n {
                        for j in 0..n {
                            h[i * n + j] = quad * z[i] * z[j] + if i == j { diag } else { 0.0 };
                        }
                    }
                }
                h
            }
        }
    }

    /// Pointwise PDE residual `-Δu - |u|^{p-1} u` from the closed forms.
    #[must_use]
    pub fn pde_residual(&self, y: &[f64]) -> f64 {
        let n = self.dim();
        let h = self.hessian(y);
        let mut lap = 0.0;
        for i in 0..n {
            lap += h[i * n + i];
        }
        let u = self.value(y);
        let p = self.params().p();
        -lap - u.abs().powf(p - 1.0) * u
    }

    /// Blow-up `T_{x,r} u(y) = r^alpha u(x + r y)`; closed under every
    /// analytic kind.
    pub fn blow_up(&self, x: &[f64], r: f64) -> Result<AnalyticField> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter {
                name: "r",
                constraint: "blow-up scale must be positive and finite",
            });
        }
        let alpha = self.params().alpha();
        Ok(match self {
            AnalyticField::PowerLawSingular(f) => {
                // r^alpha c0 |P(x + r y - c)|^{-alpha}
                //   = c0 |P(y - (c - x)/r)|^{-alpha}.
                let center = f
                    .center
                    .iter()
                    .zip(x.iter())
                    .map(|(&c, &xi)| (c - xi) / r)
                    .collect();
                AnalyticField::PowerLawSingular(PowerLawSingular {
                    params: f.params,
                    c0: f.c0,
                    center,
                    frame: f.frame.clone(),
                    m: f.m,
                })
            }
            AnalyticField::Zero { params } => AnalyticField::Zero { params: *params },
            AnalyticField::AffineBump(f) => {
                let ra = r.powf(alpha);
                let zx = geom::sub(x, &f.center);
                let center = f
                    .center
                    .iter()
                    .zip(x.iter())
                    .map(|(&c, &xi)| (c - xi) / r)
                    .collect();
                AnalyticField::AffineBump(AffineBump {
                    params: f.params,
                    center,
                    offset: ra * (f.offset + geom::dot(&f.slope, &zx)),
                    slope: f.slope.iter().map(|&s| s * ra * r).collect(),
                    amplitude: ra * f.amplitude,
                    radius: f.radius / r,
                })
            }
        })
    }
}

impl GridField {
    /// Validates and builds a grid field.
    pub fn new(
        params: ProblemParams,
        origin: Vec<f64>,
        spacing: f64,
        shape: Vec<usize>,
        values: Vec<f64>,
        capped_cells: Vec<usize>,
    ) -> Result<Self> {
        let n = params.n();
        if origin.len() != n || shape.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if origin.len() != n {
                    origin.len()
                } else {
                    shape.len()
                },
            });
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::BadGrid {
                reason: "spacing must be positive and finite",
            });
        }
        if shape.iter().any(|&s| s < 3) {
            return Err(Error::BadGrid {
                reason: "each axis needs at least 3 cells",
            });
        }
        let count: usize = shape.iter().product();
        if values.len() != count {
            return Err(Error::BadGrid {
                reason: "value count does not match the shape product",
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadGrid {
                reason: "values must be finite",
            });
        }
        let mut capped = capped_cells;
        capped.sort_unstable();
        capped.dedup();
        if capped.last().is_some_and(|&i| i >= count) {
            return Err(Error::BadGrid {
                reason: "capped cell index out of range",
            });
        }
        Ok(Self {
            params,
            origin,
            spacing,
            shape,
            values,
            capped_cells: capped,
        })
    }

    /// Ambient dimension.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    /// Centre of the cell with multi-index `idx`.
    #[must_use]
    pub fn cell_center(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(self.origin.iter())
            .map(|(&i, &o)| o + (i as f64 + 0.5) * self.spacing)
            .collect()
    }

    /// Flat index of a multi-index (row-major, last axis fastest).
    #[must_use]
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (d, &i) in idx.iter().enumerate() {
            flat = flat * self.shape[d] + i;
        }
        flat
    }

    /// True when the closed ball `B_r(x)` lies inside the grid box.
    #[must_use]
    pub fn contains_ball(&self, x: &[f64], r: f64) -> bool {
        x.iter().enumerate().all(|(d, &xd)| {
            let lo = self.origin[d];
            let hi = self.origin[d] + self.shape[d] as f64 * self.spacing;
            xd - r >= lo - 1e-12 && xd + r <= hi + 1e-12
        })
    }

    /// True when the point lies inside the grid box.
    #[must_use]
    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.contains_ball(x, 0.0)
    }

    /// Visits every cell whose centre lies in the closed ball `B_r(x)`,
    /// passing the flat index, centre, and value.  Iteration order is the
    /// row-major index order (deterministic).
    pub fn visit_ball_cells(&self, x: &[f64], r: f64, mut f: impl FnMut(usize, &[f64], f64)) {
        let n = self.dim();
        // Per-axis index windows from the bounding box.
        let mut lo = vec![0usize; n];
        let mut hi = vec![0usize; n];
        for d in 0..n {
            let a = (x[d] - r - self.origin[d]) / self.spacing - 0.5;
            let b = (x[d] + r - self.origin[d]) / self.spacing - 0.5;
            lo[d] = a.ceil().max(0.0) as usize;
            hi[d] = (b.floor().min(self.shape[d] as f64 - 1.0)).max(-1.0) as usize;
            if b < 0.0 || a > self.shape[d] as f64 - 1.0 {
                return; // Window empty on this axis.
            }
        }
        let mut idx = lo.clone();
        let r2 = r * r;
        let mut center = vec![0.0; n];
        'outer: loop {
            let mut d2 = 0.0;
            for d in 0..n {
                center[d] = self.origin[d] + (idx[d] as f64 + 0.5) * self.spacing;
                let dd = center[d] - x[d];
                d2 += dd * dd;
            }
            if d2 <= r2 {
                let flat = self.flat_index(&idx);
                f(flat, &center, self.values[flat]);
            }
            // Odometer increment within the window.
            for d in (0..n).rev() {
                idx[d] += 1;
                if idx[d] <= hi[d] {
                    continue 'outer;
                }
                idx[d] = lo[d];
            }
            break;
        }
    }

    /// Number of cell centres inside the closed ball.
    #[must_use]
    pub fn count_ball_cells(&self, x: &[f64], r: f64) -> usize {
        let mut count = 0;
        self.visit_ball_cells(x, r, |_, _, _| count += 1);
        count
    }

    /// Multilinear interpolation of the cell-centre values at `y`.
    ///
    /// Fails with [`Error::OutOfDomain`] outside the grid box.  Within the
    /// outer half-cell margin the interpolation extrapolates linearly from
    /// the boundary cells (still continuous).
    pub fn value(&self, y: &[f64]) -> Result<f64> {
        let n = self.dim();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        if !self.contains_point(y) {
            return Err(Error::OutOfDomain {
                what: "grid value",
            });
        }
        // Cell-centre coordinates: s = (y - origin)/h - 1/2.
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0f64; n];
        for d in 0..n {
            let s = (y[d] - self.origin[d]) / self.spacing - 0.5;
            let b = s.floor().clamp(0.0, self.shape[d] as f64 - 2.0);
            base[d] = b as usize;
            frac[d] = s - b;
        }
        // Accumulate over the 2^n corners.
        let mut total = 0.0;
        let corners = 1usize << n;
        let mut idx = vec![0usize; n];
        for mask in 0..corners {
            let mut w = 1.0;
            for d in 0..n {
                let bit = (mask >> d) & 1;
                idx[d] = base[d] + bit;
                w *= if bit == 1 { frac[d] } else { 1.0 - frac[d] };
            }
            if w != 0.0 {
                total += w * self.values[self.flat_index(&idx)];
            }
        }
        Ok(total)
    }

    /// Gradient by central differences of the interpolant with step equal to
    /// the grid spacing (the classical second-order stencil at cell
    /// centres).  Within one spacing of a box face the stencil shifts to the
    /// matching one-sided second-order difference, so the gradient exists
    /// everywhere [`Self::contains_point`] holds.
    pub fn gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let h = self.spacing;
        let mut out = Vec::with_capacity(n);
        let mut yy = y.to_vec();
        for d in 0..n {
            let lo = self.origin[d];
            let hi = self.origin[d] + self.shape[d] as f64 * self.spacing;
            let slope = if y[d] + h > hi {
                // Backward 3-point: (3 v(y) - 4 v(y-h) + v(y-2h)) / (2h).
                let v0 = self.value(&yy)?;
                yy[d] = y[d] - h;
                let vm = self.value(&yy)?;
                yy[d] = y[d] - 2.0 * h;
                let vmm = self.value(&yy)?;
                (3.0 * v0 - 4.0 * vm + vmm) / (2.0 * h)
            } else if y[d] - h < lo {
                // Forward 3-point mirror.
                let v0 = self.value(&yy)?;
                yy[d] = y[d] + h;
                let vp = self.value(&yy)?;
                yy[d] = y[d] + 2.0 * h;
                let vpp = self.value(&yy)?;
                (-3.0 * v0 + 4.0 * vp - vpp) / (2.0 * h)
            } else {
                yy[d] = y[d] + h;
                let vp = self.value(&yy)?;
                yy[d] = y[d] - h;
                let vm = self.value(&yy)?;
                (vp - vm) / (2.0 * h)
            };
            yy[d] = y[d];
            out.push(slope);
        }
        Ok(out)
    }

    /// Hessian by second-order central differences with step equal to the
    /// grid spacing; this is the highest derivative order grids support.
    pub fn hessian(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let h = self.spacing;
        let mut out = vec![0.0; n * n];
        let v0 = self.value(y)?;
        let mut yy = y.to_vec();
        for i in 0..n {
            // Diagonal: (v(+h) - 2 v + v(-h)) / h^2.
            yy[i] = y[i] + h;
            let vp = self.value(&yy)?;
            yy[i] = y[i] - h;
            let vm = self.value(&yy)?;
            yy[i] = y[i];
            out[i * n + i] = (vp - 2.0 * v0 + vm) / (h * h);
            for j in (i + 1)..n {
                // Mixed: four-point stencil / (4 h^2).
                yy[i] = y[i] + h;
                yy[j] = y[j] + h;
                let vpp = self.value(&yy)?;
                yy[j] = y[j] - h;
                let vpm = self.value(&yy)?;
                yy[i] = y[i] - h;
                let vmm = self.value(&yy)?;
                yy[j] = y[j] + h;
                let vmp = self.value(&yy)?;
                yy[i] = y[i];
                yy[j] = y[j];
                let mixed = (vpp - vpm - vmp + vmm) / (4.0 * h * h);
                out[i * n + j] = mixed;
                out[j * n + i] = mixed;
            }
        }
        Ok(out)
    }

    /// Blow-up of the sampled data: rescales the box geometry and values;
    /// the ball `B_r(x)` must lie inside the grid box.
    pub fn blow_up(&self, x: &[f64], r: f64) -> Result<GridField> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter {
                name: "r",
                constraint: "blow-up scale must be positive and finite",
            });
        }
        if !self.contains_ball(x, r) {
            return Err(Error::OutOfDomain { what: "blow_up" });
        }
        let ra = r.powf(self.params.alpha());
        Ok(GridField {
            params: self.params,
            origin: self
                .origin
                .iter()
                .zip(x.iter())
                .map(|(&o, &xi)| (o - xi) / r)
                .collect(),
            spacing: self.spacing / r,
            shape: self.shape.clone(),
            values: self.values.iter().map(|&v| ra * v).collect(),
            capped_cells: self.capped_cells.clone(),
        })
    }
}

/// Samples an analytic field to cell-centre grid data.
///
/// For the singular model, magnitudes above `c0 (h/2)^{-alpha}` (the value
/// half a cell away from the spine) are capped at that bound with sign
/// preserved, and the affected flat indices are recorded — capping is never
/// silent.
pub fn sample_to_grid(
    u: &AnalyticField,
    origin: Vec<f64>,
    spacing: f64,
    shape: Vec<usize>,
) -> Result<GridField> {
    let n = u.dim();
    if origin.len() != n || shape.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if origin.len() != n {
                origin.len()
            } else {
                shape.len()
            },
        });
    }
    if shape.iter().any(|&s| s < 3) {
        return Err(Error::BadGrid {
            reason: "each axis needs at least 3 cells",
        });
    }
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::BadGrid {
            reason: "spacing must be positive and finite",
        });
    }
    let cap = match u {
        AnalyticField::PowerLawSingular(f) => {
            Some(f.c0 * (spacing / 2.0).powf(-f.params.alpha()))
        }
        _ => None,
    };
    let count: usize = shape.iter().product();
    let mut values = Vec::with_capacity(count);
    let mut capped = Vec::new();
    let mut idx = vec![0usize; n];
    let mut center = vec![0.0f64; n];
    for flat in 0..count {
        for d in 0..n {
            center[d] = origin[d] + (idx[d] as f64 + 0.5) * spacing;
        }
        let mut v = u.value(&center);
        if let Some(cap) = cap {
            if !v.is_finite() || v.abs() > cap {
                let sign = if v.is_sign_negative() { -1.0 } else { 1.0 };
                v = sign * cap;
                capped.push(flat);
            }
        }
        values.push(v);
        // Row-major odometer (last axis fastest).
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < shape[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    GridField::new(*u.params(), origin, spacing, shape, values, capped)
}

impl Field {
    /// Problem parameters.
    #[must_use]
    pub fn params(&self) -> &ProblemParams {
        match self {
            Field::Analytic(a) => a.params(),
            Field::Grid(g) => &g.params,
        }
    }

    /// Ambient dimension.
    #[must_use]
    pub fn dim(&self) -> usize {
        match self {
            Field::Analytic(a) => a.dim(),
            Field::Grid(g) => g.dim(),
        }
    }

    /// Field value at `y`.
    pub fn value(&self, y: &[f64]) -> Result<f64> {
        match self {
            Field::Analytic(a) => Ok(a.value(y)),
            Field::Grid(g) => g.value(y),
        }
    }

    /// Gradient at `y`.
    pub fn gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        match self {
            Field::Analytic(a) => Ok(a.gradient(y)),
            Field::Grid(g) => g.gradient(y),
        }
    }

    /// Hessian at `y` (`j = 2` is the highest order grids support; analytic
    /// fields evaluate their closed forms).
    pub fn hessian(&self, y: &[f64]) -> Result<Vec<f64>> {
        match self {
            Field::Analytic(a) => Ok(a.hessian(y)),
            Field::Grid(g) => g.hessian(y),
        }
    }

    /// Blow-up `T_{x,r} u`; stays within the same representation.
    pub fn blow_up(&self, x: &[f64], r: f64) -> Result<Field> {
        match self {
            Field::Analytic(a) => a.blow_up(x, r).map(Field::Analytic),
            Field::Grid(g) => g.blow_up(x, r).map(Field::Grid),
        }
    }

    /// True when the closed ball `B_r(x)` lies inside the field's domain
    /// (always, for analytic fields).
    #[must_use]
    pub fn contains_ball(&self, x: &[f64], r: f64) -> bool {
        match self {
            Field::Analytic(_) => true,
            Field::Grid(g) => g.contains_ball(x, r),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v0_point() -> AnalyticField {
        let params = ProblemParams::new(5, 2.5).unwrap();
        make_singular_solution(params, 0, vec![0.0; 5], Vec::new()).unwrap()
    }

    fn cylinder() -> AnalyticField {
        let params = ProblemParams::new(6, 3.0).unwrap();
        let mut frame = vec![0.0; 6];
        frame[0] = 1.0;
        make_singular_solution(params, 1, vec![0.0; 6], frame).unwrap()
    }

    #[test]
    fn c0_closed_forms() {
        // n = 5, p = 2.5, m = 0: c0^{3/2} = (4/3)(3 - 4/3) = 20/9.
        let AnalyticField::PowerLawSingular(f) = v0_point() else {
            unreachable!()
        };
        let expect = (20.0f64 / 9.0).powf(2.0 / 3.0);
        assert!((f.c0 - expect).abs() < 1e-14 * expect);

        // n = 6, p = 3, m = 1: c0^2 = 1*(5 - 2 - 1) = 2.
        let AnalyticField::PowerLawSingular(f) = cylinder() else {
            unreachable!()
        };
        assert!((f.c0 - 2.0f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn energy_integrability_guard() {
        // n = 5, p = 2.5, m = 1: alpha_p = 14/3 >= n - m = 4 -> rejected.
        let params = ProblemParams::new(5, 2.5).unwrap();
        let mut frame = vec![0.0; 5];
        frame[0] = 1.0;
        assert!(matches!(
            make_singular_solution(params, 1, vec![0.0; 5], frame),
            Err(Error::EnergyNonIntegrable { .. })
        ));
    }

    #[test]
    fn bad_frames_rejected() {
        let params = ProblemParams::new(6, 3.0).unwrap();
        // Not unit length.
        let mut frame = vec![0.0; 6];
        frame[0] = 2.0;
        assert!(matches!(
            make_singular_solution(params, 1, vec![0.0; 6], frame),
            Err(Error::BadFrame { .. })
        ));
        // Wrong entry count.
        assert!(make_singular_solution(params, 1, vec![0.0; 6], vec![1.0]).is_err());
    }

    #[test]
    fn pde_residual_vanishes_off_spine() {
        for field in [v0_point(), cylinder()] {
            let n = field.dim();
            // A few fixed off-spine points at order-one distance.
            for k in 0..20 {
                let mut y = vec![0.0; n];
                for d in 0..n {
                    y[d] = 0.3 + 0.1 * ((k * 7 + d * 3) % 11) as f64 / 11.0;
                }
                let r = field.pde_residual(&y);
                assert!(
                    r.abs() < 1e-10,
                    "residual {r} too large at {y:?} (n = {n})"
                );
            }
        }
    }

    #[test]
    fn homogeneity_of_singular_model() {
        // u is homogeneous: T_{c,r} u = u for any r when centred on the
        // spine; check values directly at sample points.
        let u = v0_point();
        for &r in &[0.5, 2.0, 7.5] {
            let blown = u.blow_up(&[0.0; 5], r).unwrap();
            for k in 1..10 {
                let y = vec![0.1 * k as f64, 0.2, -0.3, 0.05, 0.4];
                let rel = (blown.value(&y) - u.value(&y)).abs() / u.value(&y).abs();
                assert!(rel < 1e-12, "homogeneity defect {rel}");
            }
        }
    }

    #[test]
    fn translation_invariance_along_spine() {
        let u = cylinder();
        // Shifting along the spine direction leaves values unchanged.
        let y = [0.7, 0.3, -0.2, 0.1, 0.4, -0.5];
        let mut y_shift = y;
        y_shift[0] += 2.5;
        assert!((u.value(&y) - u.value(&y_shift)).abs() < 1e-12 * u.value(&y).abs());
    }

    #[test]
    fn blow_up_composition_law() {
        // T_{y,s}(T_{x,r} u) = T_{x + r y, r s} u.
        let u = cylinder();
        let x = [0.2, -0.1, 0.3, 0.0, 0.1, 0.05];
        let y = [0.5, 0.25, -0.5, 0.1, 0.0, -0.2];
        let (r, s) = (0.5, 0.25);
        let lhs = u.blow_up(&x, r).unwrap().blow_up(&y, s).unwrap();
        let xy: Vec<f64> = x.iter().zip(y.iter()).map(|(&a, &b)| a + r * b).collect();
        let rhs = u.blow_up(&xy, r * s).unwrap();
        for k in 0..10 {
            let z: Vec<f64> = (0..6).map(|d| 0.3 * ((k + d) % 5) as f64 - 0.4).collect();
            let (a, b) = (lhs.value(&z), rhs.value(&z));
            assert!(
                (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                "composition defect at {z:?}"
            );
        }
    }

    #[test]
    fn affine_bump_derivatives_match_differences() {
        let params = ProblemParams::new(5, 2.5).unwrap();
        let f = AnalyticField::AffineBump(AffineBump {
            params,
            center: vec![0.1, 0.0, -0.2, 0.0, 0.3],
            offset: 0.7,
            slope: vec![0.2, -0.1, 0.0, 0.4, 0.1],
            amplitude: 1.5,
            radius: 2.0,
        });
        let y = [0.5, 0.3, 0.1, -0.2, 0.4];
        let h = 1e-5;
        let grad = f.gradient(&y);
        let hess = f.hessian(&y);
        for d in 0..5 {
            let mut yp = y;
            yp[d] += h;
            let mut ym = y;
            ym[d] -= h;
            let fd = (f.value(&yp) - f.value(&ym)) / (2.0 * h);
            assert!((fd - grad[d]).abs() < 1e-8);
            let sd = (f.value(&yp) - 2.0 * f.value(&y) + f.value(&ym)) / (h * h);
            assert!((sd - hess[d * 5 + d]).abs() < 1e-5);
        }
    }

    #[test]
    fn grid_sampling_round_trip_and_capping() {
        let u = v0_point();
        let g = sample_to_grid(&u, vec![-1.0; 5], 0.25, vec![8; 5]).unwrap();
        assert_eq!(g.values.len(), 8usize.pow(5));
        // With the box at [-1, 1]^5 every cell centre sits at distance
        // >= h/2 from the spine, so nothing needs capping.  Shift the box so
        // one cell centre lands exactly on the spine and capping must fire.
        let g2 = sample_to_grid(&u, vec![-1.125; 5], 0.25, vec![9; 5]).unwrap();
        assert!(!g2.capped_cells.is_empty());
        let AnalyticField::PowerLawSingular(f) = &u else {
            unreachable!()
        };
        let cap = f.c0 * (0.125f64).powf(-f.params.alpha());
        for &ci in &g2.capped_cells {
            assert!(g2.values[ci].abs() <= cap * (1.0 + 1e-15));
        }
        // Uncapped cells match the analytic values exactly.
        let mut checked = 0;
        g.visit_ball_cells(&[0.5; 5], 0.4, |flat, center, v| {
            if !g.capped_cells.contains(&flat) {
                assert!((v - u.value(center)).abs() <= 1e-12 * v.abs());
                checked += 1;
            }
        });
        assert!(checked > 0);
    }

    #[test]
    fn grid_interpolation_and_differences_converge() {
        // Smooth field: gradient converges at order >= 1.8 under h -> h/2.
        let params = ProblemParams::new(3, 6.0).unwrap();
        let f = AnalyticField::AffineBump(AffineBump {
            params,
            center: vec![0.0, 0.0, 0.0],
            offset: 0.3,
            slope: vec![0.1, -0.2, 0.05],
            amplitude: 1.0,
            radius: 1.5,
        });
        let y = [0.21, -0.13, 0.17];
        let exact = f.gradient(&y);
        let mut errs = Vec::new();
        for &cells in &[16usize, 32, 64] {
            let h = 2.0 / cells as f64;
            let g = sample_to_grid(&f, vec![-1.0; 3], h, vec![cells; 3]).unwrap();
            let grad = g.gradient(&y).unwrap();
            let err: f64 = grad
                .iter()
                .zip(exact.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(
            order1 > 1.8 && order2 > 1.8,
            "observed orders {order1:.2}, {order2:.2} (errors {errs:?})"
        );
    }

    #[test]
    fn grid_out_of_domain() {
        let u = v0_point();
        let g = sample_to_grid(&u, vec![-1.0; 5], 0.25, vec![8; 5]).unwrap();
        assert!(matches!(
            g.value(&[5.0, 0.0, 0.0, 0.0, 0.0]),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(g.contains_ball(&[0.0; 5], 0.9));
        assert!(!g.contains_ball(&[0.0; 5], 1.1));
    }

    #[test]
    fn grid_blow_up_rescales_geometry() {
        let u = cylinder();
        let g = sample_to_grid(&u, vec![-1.0; 6], 0.25, vec![8; 6]).unwrap();
        let b = g.blow_up(&[0.0; 6], 0.5).unwrap();
        assert!((b.spacing - 0.5).abs() < 1e-15);
        assert!((b.origin[0] + 2.0).abs() < 1e-15);
        // Values scale by r^alpha.
        let ra = 0.5f64.powf(g.params.alpha());
        assert!((b.values[0] - ra * g.values[0]).abs() < 1e-14 * b.values[0].abs().max(1.0));
        // Out-of-domain blow-up centre rejected.
        assert!(g.blow_up(&[0.9; 6], 0.5).is_err());
    }
}
