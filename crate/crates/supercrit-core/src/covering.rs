//! Good/bad-ball covering construction for quantitative strata.
//!
//! The builder descends from a top ball `B_R(x0)` towards a terminal scale
//! `r`.  At an active ball `B_s(x)` it estimates the energy ceiling
//! `E = sup ϑ_s` over `B_{2s}(x)` (fixed once at the root), finds the
//! *pinch set* `F = {y ∈ B_{2s}(x) : ϑ_{ρs/20}(u, y) > E − δ}` of points
//! whose density stays high down to the fine probe scale, and asks whether
//! `F` effectively spans a k-dimensional affine subspace at threshold
//! `ρs/20`:
//!
//! * span `< k` — a **bad** ball: the high-density set flattens into the
//!   recorded lower-dimensional subspace, and by construction all pinch
//!   points lie within `ρs/10` of it; the ball freezes as a leaf.
//! * span `= k` — a **good** ball: the tube `B_{ρs/10}(L') ∩ B_s(x)` is
//!   covered by child balls of radius `max(ρs, r)` centred on a lattice in
//!   `L'`, children that touch no detected stratum point are discarded,
//!   and the rest recurse.  Children stop at the terminal radius
//!   (**terminal-r**) or when their local density ceiling has dropped
//!   below `E − δ` (**energy-drop**; for exact model fields the lattice
//!   tracks the spine so this label marks robustness against curved or
//!   noisy data rather than a path the models exercise).
//!
//! Pinch sets cannot be populated by plain rejection sampling — at fine
//! probe scales the high-density set concentrates near the singular set,
//! whose tube has vanishing volume fraction — so the builder uses a
//! deterministic multi-resolution descent: a low-discrepancy sample is
//! scored at the ball scale, survivors spawn offsets within the current
//! scale, and the scale halves until the probe scale is reached.  The same
//! descent, thresholded at `ξ` at the terminal probe scale, produces the
//! detected stratum sample that drives child pruning and the coverage
//! check.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::float::FloatExt;

use crate::density::{self, QuadraturePolicy};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::geom;
use crate::jacobi::symmetric_eigen;
use crate::quad::{halton_ball, halton_bases, halton_point};
use crate::subspace::AffineSubspace;
use crate::symmetry;

/// Classification of a ball in the covering tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallLabel {
    /// The pinch set spans k dimensions; the ball refines into children.
    Good,
    /// The pinch set spans fewer than k dimensions (or is empty); frozen.
    Bad,
    /// Reached the terminal radius.
    TerminalR,
    /// Local density ceiling fell below `E - δ`.
    EnergyDrop,
}

/// One ball of the covering tree.
#[derive(Debug, Clone, PartialEq)]
pub struct BallNode {
    /// Ball centre.
    pub center: Vec<f64>,
    /// Ball radius.
    pub radius: f64,
    /// Good/bad/terminal classification.
    pub label: BallLabel,
    /// Sampled pinch set (flat points; empty for terminal leaves).
    pub pinch: Vec<f64>,
    /// Effectively spanned subspace: the k-plane for good balls, the
    /// achieved lower-dimensional plane for bad balls with a nonempty
    /// pinch set.
    pub subspace: Option<AffineSubspace>,
    /// Child balls (empty for leaves).
    pub children: Vec<BallNode>,
}

impl BallNode {
    /// True when the node has no children.
    #[must_use]
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Parameters of a covering run.
#[derive(Debug, Clone)]
pub struct CoverConfig {
    /// Stratum dimension the cover tracks.
    pub k: usize,
    /// Symmetry threshold the run is associated with (recorded; the
    /// defaults `delta = xi = eps/4` derive from it).
    pub eps: f64,
    /// Terminal ball radius.
    pub r: f64,
    /// Top ball radius.
    pub big_r: f64,
    /// Refinement ratio (must satisfy `0 < rho < 1/100`).
    pub rho: f64,
    /// Pinch-set energy margin.
    pub delta: f64,
    /// Stratum-detection density threshold.
    pub xi: f64,
    /// Multiplier on the default `200·2^n` sample count (tests shrink it).
    pub sample_scale: f64,
    /// Quadrature policy for all density probes (coarse by default: tree
    /// probes trade accuracy for volume, and the comparisons are against
    /// margins `delta`, `xi` far above the quadrature error).
    pub policy: QuadraturePolicy,
}

impl CoverConfig {
    /// Defaults for the given dimension/threshold: `rho = 1/128`,
    /// `delta = xi = eps/4`, full sampling, coarse quadrature.
    #[must_use]
    pub fn new(k: usize, eps: f64, r: f64, big_r: f64) -> Self {
        Self {
            k,
            eps,
            r,
            big_r,
            rho: 1.0 / 128.0,
            delta: eps / 4.0,
            xi: eps / 4.0,
            sample_scale: 1.0,
            policy: QuadraturePolicy::coarse(),
        }
    }
}

/// Result of the covering construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverTree {
    /// Stratum dimension.
    pub k: usize,
    /// Associated symmetry threshold.
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
    /// Energy ceiling `E` measured at the root.
    pub energy: f64,
    /// Detected stratum sample (flat points inside the top ball).
    pub stratum_sample: Vec<f64>,
    /// Root ball; `None` when the detected stratum sample is empty.
    pub root: Option<BallNode>,
    /// Radii of all leaves.
    pub leaf_radii: Vec<f64>,
    /// `Σ_leaves r_x^k`.
    pub tally: f64,
}

impl CoverTree {
    /// All leaf nodes in deterministic (depth-first) order.
    #[must_use]
    pub fn leaves(&self) -> Vec<&BallNode> {
        let mut out = Vec::new();
        if let Some(root) = &self.root {
            collect_leaves(root, &mut out);
        }
        out
    }

    /// Number of terminal-radius leaves.
    #[must_use]
    pub fn terminal_leaf_count(&self) -> usize {
        self.leaves()
            .iter()
            .filter(|b| b.label == BallLabel::TerminalR)
            .count()
    }

    /// Verifies the structural invariants of the built tree:
    ///
    /// * sibling balls are pairwise disjoint at 1/10 radius,
    /// * child radii obey the refinement rule `max(ρ·parent, r)`,
    /// * every detected stratum point lies inside some leaf ball.
    pub fn check_invariants(&self) -> Result<()> {
        if let Some(root) = &self.root {
            check_node(root, self.rho, self.r)?;
            let n = root.center.len();
            let leaves = self.leaves();
            for p in self.stratum_sample.chunks_exact(n) {
                let covered = leaves
                    .iter()
                    .any(|b| geom::dist(p, &b.center) <= b.radius * (1.0 + 1e-12));
                if !covered {
                    return Err(Error::OutOfDomain {
                        what: "a detected stratum point escapes every leaf ball",
                    });
                }
            }
        } else if !self.stratum_sample.is_empty() {
            return Err(Error::OutOfDomain {
                what: "stratum points detected but the tree is empty",
            });
        }
        Ok(())
    }
}

fn collect_leaves<'a>(node: &'a BallNode, out: &mut Vec<&'a BallNode>) {
    if node.is_leaf() {
        out.push(node);
    } else {
        for c in &node.children {
            collect_leaves(c, out);
        }
    }
}

fn check_node(node: &BallNode, rho: f64, r: f64) -> Result<()> {
    let limit = (rho * node.radius).max(r) * (1.0 + 1e-12);
    for (i, a) in node.children.iter().enumerate() {
        if a.radius > limit {
            return Err(Error::InvalidParameter {
                name: "children",
                constraint: "child radius exceeds the refinement rule",
            });
        }
        for (j, b) in node.children.iter().enumerate().skip(i + 1) {
            let d = geom::dist(&a.center, &b.center);
            if d < (a.radius + b.radius) / 10.0 {
                return Err(Error::OverlappingBalls { i, j });
            }
        }
    }
    for c in &node.children {
        check_node(c, rho, r)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Effective span
// ---------------------------------------------------------------------------

/// Greedy effective-span detection: starting from the first point,
/// repeatedly adds the point farthest from the current affine span while
/// that distance is at least `2·rho`, and reports the achieved dimension
/// with the selected points (flat).
///
/// Equidistant maximizers break ties towards the lowest index, so runs are
/// deterministic.  On return, every remaining point lies within `2·rho`
/// of the spanned subspace.
pub fn effective_span(points: &[f64], n: usize, rho: f64) -> Result<(usize, Vec<f64>)> {
    if n == 0 || points.len() % n != 0 {
        return Err(Error::DimensionMismatch {
            expected: n.max(1),
            got: points.len() % n.max(1),
        });
    }
    if points.is_empty() {
        return Err(Error::InvalidParameter {
            name: "points",
            constraint: "effective span needs at least one point",
        });
    }
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidParameter {
            name: "rho",
            constraint: "independence scale must be positive and finite",
        });
    }
    let base = &points[..n];
    let mut basis = base.to_vec();
    let mut frame: Vec<f64> = Vec::new();
    let mut k = 0usize;
    while k < n {
        let mut best = f64::NEG_INFINITY;
        let mut best_idx = usize::MAX;
        for (idx, y) in points.chunks_exact(n).enumerate() {
            let d = geom::dist_to_affine(y, base, &frame, n);
            if d > best * (1.0 + 1e-15) {
                best = d;
                best_idx = idx;
            }
        }
        if best < 2.0 * rho || best_idx == usize::MAX {
            break;
        }
        let y = &points[best_idx * n..(best_idx + 1) * n];
        let mut candidate = frame.clone();
        candidate.extend(geom::sub(y, base));
        let next = geom::orthonormalize(&candidate, n, 1e-12 * rho.max(1.0e-300));
        if next.len() != (k + 1) * n {
            break;
        }
        frame = next;
        basis.extend_from_slice(y);
        k += 1;
    }
    Ok((k, basis))
}

// ---------------------------------------------------------------------------
// Builder
// ---------------------------------------------------------------------------

/// Runs the covering construction with default parameters
/// (`rho = 1/128`, sampling at `200·2^n`, coarse quadrature).
pub fn build_cover(
    u: &Field,
    k: usize,
    eps: f64,
    r: f64,
    big_r: f64,
    rho: f64,
    delta: f64,
    xi: f64,
    x0: &[f64],
) -> Result<CoverTree> {
    let mut cfg = CoverConfig::new(k, eps, r, big_r);
    cfg.rho = rho;
    cfg.delta = delta;
    cfg.xi = xi;
    build_cover_with(u, &cfg, x0)
}

/// [`build_cover`] under an explicit configuration.
pub fn build_cover_with(u: &Field, cfg: &CoverConfig, x0: &[f64]) -> Result<CoverTree> {
    let n = u.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if !(cfg.r.is_finite() && cfg.big_r.is_finite() && cfg.r > 0.0 && cfg.r < cfg.big_r)
        || cfg.big_r > 1.0
    {
        return Err(Error::InvalidParameter {
            name: "r",
            constraint: "scales out of order",
        });
    }
    if !(cfg.rho > 0.0 && cfg.rho < 0.01) {
        return Err(Error::InvalidParameter {
            name: "rho",
            constraint: "refinement ratio must lie in (0, 1/100)",
        });
    }
    if !(cfg.delta > 0.0 && cfg.xi > 0.0 && cfg.eps > 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            constraint: "thresholds must be positive",
        });
    }
    if !u.contains_ball(x0, 12.0 * cfg.big_r) {
        return Err(Error::OutOfDomain {
            what: "the covering needs the enlarged top ball inside the domain",
        });
    }

    let depth_cap = ((cfg.r / cfg.big_r).ln() / cfg.rho.ln()).ceil() as usize + 2;
    let mut builder = Builder {
        u,
        cfg,
        n,
        e_top: 0.0,
        depth_cap,
        stratum: Vec::new(),
        burn: 7,
    };

    builder.stratum = builder.detect_stratum(x0)?;
    if builder.stratum.is_empty() {
        return Ok(CoverTree {
            k: cfg.k,
            eps: cfg.eps,
            r: cfg.r,
            big_r: cfg.big_r,
            rho: cfg.rho,
            delta: cfg.delta,
            xi: cfg.xi,
            energy: 0.0,
            stratum_sample: Vec::new(),
            root: None,
            leaf_radii: Vec::new(),
            tally: 0.0,
        });
    }

    let scan = builder.sup_scan(x0, 2.0 * cfg.big_r, cfg.big_r)?;
    builder.e_top = scan.sup;
    let root = builder.process(x0.to_vec(), cfg.big_r, 0, Some(scan))?;

    let mut leaf_radii = Vec::new();
    collect_leaf_radii(&root, &mut leaf_radii);
    let tally = leaf_radii.iter().map(|r| r.powi(cfg.k as i32)).sum();
    let tree = CoverTree {
        k: cfg.k,
        eps: cfg.eps,
        r: cfg.r,
        big_r: cfg.big_r,
        rho: cfg.rho,
        delta: cfg.delta,
        xi: cfg.xi,
        energy: builder.e_top,
        stratum_sample: builder.stratum,
        root: Some(root),
        leaf_radii,
        tally,
    };
    tree.check_invariants()?;
    Ok(tree)
}

fn collect_leaf_radii(node: &BallNode, out: &mut Vec<f64>) {
    if node.is_leaf() {
        out.push(node.radius);
    } else {
        for c in &node.children {
            collect_leaf_radii(c, out);
        }
    }
}

/// Scored sample of a ball: the supremum estimate, its (refined)
/// maximizer, and all evaluated points with values.
struct Scan {
    sup: f64,
    evaluated: Vec<(Vec<f64>, f64)>,
}

struct Builder<'a> {
    u: &'a Field,
    cfg: &'a CoverConfig,
    n: usize,
    e_top: f64,
    depth_cap: usize,
    stratum: Vec<f64>,
    burn: u64,
}

impl Builder<'_> {
    /// Next distinct Halton burn-in offset (keeps every sample sequence in
    /// the run distinct while staying deterministic).
    fn next_burn(&mut self) -> u64 {
        self.burn += 131;
        self.burn
    }

    /// `ϑ_scale(u, y)`; `None` when the probe ball leaves the domain or
    /// holds too few grid cells.
    fn try_vt(&self, y: &[f64], scale: f64) -> Result<Option<f64>> {
        match density::vartheta_with_policy(self.u, y, scale, &self.cfg.policy) {
            Ok(v) => Ok(Some(v)),
            Err(Error::OutOfDomain { .. }) | Err(Error::BallTooSmall { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Number of sample points per ball (`200·2^n` scaled).
    fn sample_count(&self) -> usize {
        let base = 200.0 * (1u64 << self.n.min(32)) as f64;
        ((base * self.cfg.sample_scale).round() as usize).max(16)
    }

    /// Energy margin in the field's own units: `delta` measures a
    /// *relative* drop once the ceiling exceeds order one.  Sampled
    /// quadrature cannot resolve absolute differences of `delta` against
    /// a ceiling thousands of times larger, and a pinch margin below the
    /// probe noise would reject genuine high-density points.
    fn margin(&self) -> f64 {
        self.cfg.delta * self.e_top.max(1.0)
    }

    /// Estimates `sup_{B_{ball_r}(x)} ϑ_{eval_scale}` on a low-discrepancy
    /// sample plus the centre, then sharpens the maximizer with a local
    /// pattern search.
    fn sup_scan(&mut self, x: &[f64], ball_r: f64, eval_scale: f64) -> Result<Scan> {
        let burn = self.next_burn();
        let mut pts = vec![x.to_vec()];
        pts.extend(halton_ball(x, ball_r, self.sample_count(), burn));
        let mut evaluated = Vec::with_capacity(pts.len());
        let mut sup = f64::NEG_INFINITY;
        let mut best: Option<Vec<f64>> = None;
        for p in pts {
            let Some(v) = self.try_vt(&p, eval_scale)? else {
                continue;
            };
            if v > sup {
                sup = v;
                best = Some(p.clone());
            }
            evaluated.push((p, v));
        }
        let Some(start) = best else {
            return Err(Error::OutOfDomain {
                what: "no sample point of the ball admits a density probe",
            });
        };
        let (refined, sup) = self.refine_max(start, sup, eval_scale, ball_r / 10.0)?;
        evaluated.push((refined, sup));
        Ok(Scan { sup, evaluated })
    }

    /// Axis-aligned pattern search: moves while an axis step improves the
    /// value, halving the step (6 rounds).
    fn refine_max(
        &self,
        mut point: Vec<f64>,
        mut value: f64,
        eval_scale: f64,
        mut step: f64,
    ) -> Result<(Vec<f64>, f64)> {
        for _ in 0..6 {
            let mut improved = false;
            for axis in 0..self.n {
                for sign in [1.0f64, -1.0] {
                    let mut cand = point.clone();
                    cand[axis] += sign * step;
                    if let Some(v) = self.try_vt(&cand, eval_scale)? {
                        if v > value {
                            value = v;
                            point = cand;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        Ok((point, value))
    }

    /// Multi-resolution descent: re-scores a population at halving scales
    /// down to `to_scale`; each stage drops candidates whose score fell to
    /// `cull` or below (safe because the density is nondecreasing in the
    /// scale: once below a threshold, always below), keeps at most `keep`
    /// survivors by farthest-point thinning (so spatial diversity cannot
    /// collapse when scores tie — exact ties are routine on a
    /// translation-invariant spine), and spawns `spawn` offsets within the
    /// current scale around each survivor.  Returns the final population
    /// scored at `to_scale`; empty when the cull exhausts it.
    fn descend(
        &mut self,
        seeds: Vec<(Vec<f64>, f64)>,
        from_scale: f64,
        to_scale: f64,
        keep: usize,
        spawn: usize,
        cull: f64,
    ) -> Result<Vec<(Vec<f64>, f64)>> {
        let mut pop: Vec<(Vec<f64>, f64)> =
            seeds.into_iter().filter(|(_, v)| *v > cull).collect();
        pop = select_spread(pop, keep);
        let mut scale = from_scale;
        while scale > to_scale && !pop.is_empty() {
            scale = (scale * 0.5).max(to_scale);
            let burn = self.next_burn();
            let bases = halton_bases(self.n);
            let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(pop.len() * (1 + spawn));
            for (p, _) in &pop {
                candidates.push(p.clone());
                for t in 0..spawn {
                    let h = halton_point(
                        burn + (candidates.len() * spawn + t) as u64,
                        &bases,
                    );
                    let offset: Vec<f64> =
                        h.iter().map(|c| (2.0 * c - 1.0) * 1.5 * scale).collect();
                    candidates.push(p.iter().zip(offset.iter()).map(|(a, b)| a + b).collect());
                }
            }
            let mut next = Vec::with_capacity(candidates.len());
            for c in candidates {
                if let Some(v) = self.try_vt(&c, scale)? {
                    if v > cull {
                        next.push((c, v));
                    }
                }
            }
            pop = select_spread(next, keep);
        }
        Ok(pop)
    }

    /// Detects the stratum sample in two phases.  Phase one descends the
    /// top-ball sample to the terminal probe scale `ρr/20` and keeps
    /// points whose density stays above `ξ` inside the top ball — this
    /// locates the high-density set but, the set being thin, the
    /// survivors cluster wherever the descent first locked on.  Phase two
    /// grows the sample along the detected structure: from each accepted
    /// point it steps a half terminal radius along the `k` directions of
    /// least gradient-moment energy (the local spine directions), snaps
    /// the candidate transversally with a short pattern search, and
    /// accepts it when the fine-scale density clears `ξ`.  The resulting
    /// spacing of half the terminal radius is what the child-pruning and
    /// coverage checks need; the cap scales like `(R/r)^k`.
    fn detect_stratum(&mut self, x0: &[f64]) -> Result<Vec<f64>> {
        let cfg = self.cfg;
        let target = cfg.rho * cfg.r / 20.0;
        let burn = self.next_burn();
        let mut seeds = Vec::new();
        if let Some(v) = self.try_vt(x0, cfg.big_r)? {
            seeds.push((x0.to_vec(), v));
        }
        for p in halton_ball(x0, cfg.big_r, self.sample_count(), burn) {
            if let Some(v) = self.try_vt(&p, cfg.big_r)? {
                seeds.push((p, v));
            }
        }
        let pop = self.descend(seeds, cfg.big_r, target, 64, 2, cfg.xi * 0.5)?;
        let core: Vec<(Vec<f64>, f64)> = pop
            .into_iter()
            .filter(|(p, v)| *v > cfg.xi && geom::dist(p, x0) <= cfg.big_r)
            .collect();
        let accepted = if cfg.k == 0 || core.is_empty() {
            core
        } else {
            self.expand_stratum(core, x0, target)?
        };
        let mut out = Vec::new();
        for (p, _) in accepted {
            out.extend_from_slice(&p);
        }
        Ok(out)
    }

    /// Phase-two growth of the stratum sample (see [`Self::detect_stratum`]).
    fn expand_stratum(
        &mut self,
        core: Vec<(Vec<f64>, f64)>,
        x0: &[f64],
        probe: f64,
    ) -> Result<Vec<(Vec<f64>, f64)>> {
        let cfg = self.cfg;
        let n = self.n;
        let h = cfg.r * 0.5;
        let cap = {
            let per_dim = 8.0 * cfg.big_r / cfg.r;
            (per_dim.powi(cfg.k as i32).round() as usize).clamp(64, 4096)
        };
        let mut ordered = core;
        ordered.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then_with(|| lex_cmp(&a.0, &b.0))
        });
        let mut accepted: Vec<(Vec<f64>, f64)> = Vec::new();
        for c in ordered {
            if accepted
                .iter()
                .all(|(a, _)| geom::dist(a, &c.0) >= 0.6 * h)
            {
                accepted.push(c);
            }
        }
        let mut queue: VecDeque<usize> = (0..accepted.len()).collect();
        while let Some(qi) = queue.pop_front() {
            if accepted.len() >= cap {
                break;
            }
            let x = accepted[qi].0.clone();
            let g = match symmetry::gradient_moment_matrix(self.u, &x, h, &cfg.policy) {
                Ok(g) => g,
                Err(Error::OutOfDomain { .. }) | Err(Error::BallTooSmall { .. }) => continue,
                Err(e) => return Err(e),
            };
            let eig = symmetric_eigen(&g, n);
            for i in 0..cfg.k.min(n) {
                let row = &eig.vectors[(n - 1 - i) * n..(n - i) * n];
                for sign in [1.0f64, -1.0] {
                    if accepted.len() >= cap {
                        break;
                    }
                    let cand: Vec<f64> =
                        x.iter().zip(row).map(|(a, b)| a + sign * h * b).collect();
                    if geom::dist(&cand, x0) > cfg.big_r {
                        continue;
                    }
                    if accepted.iter().any(|(a, _)| geom::dist(a, &cand) < 0.6 * h) {
                        continue;
                    }
                    let Some(v0) = self.try_vt(&cand, probe)? else {
                        continue;
                    };
                    if v0 <= cfg.xi {
                        continue;
                    }
                    let (snapped, v) = self.refine_max(cand, v0, probe, 4.0 * probe)?;
                    if v <= cfg.xi
                        || geom::dist(&snapped, x0) > cfg.big_r
                        || accepted
                            .iter()
                            .any(|(a, _)| geom::dist(a, &snapped) < 0.6 * h)
                    {
                        continue;
                    }
                    accepted.push((snapped, v));
                    queue.push_back(accepted.len() - 1);
                }
            }
        }
        Ok(accepted)
    }

    /// Recursive node construction.
    fn process(
        &mut self,
        center: Vec<f64>,
        radius: f64,
        depth: usize,
        scan: Option<Scan>,
    ) -> Result<BallNode> {
        if depth > self.depth_cap {
            return Err(Error::NonTermination {
                depth_cap: self.depth_cap,
            });
        }
        let cfg = self.cfg;
        if radius <= cfg.r * (1.0 + 1e-12) {
            return Ok(BallNode {
                center,
                radius,
                label: BallLabel::TerminalR,
                pinch: Vec::new(),
                subspace: None,
                children: Vec::new(),
            });
        }
        let margin = self.margin();
        let scan = match scan {
            Some(s) => s,
            None => {
                let s = self.sup_scan(&center, 2.0 * radius, radius)?;
                if s.sup <= self.e_top - margin {
                    return Ok(BallNode {
                        center,
                        radius,
                        label: BallLabel::EnergyDrop,
                        pinch: Vec::new(),
                        subspace: None,
                        children: Vec::new(),
                    });
                }
                s
            }
        };

        // Pinch set at the fine probe scale.  Two candidate sources: the
        // ball-sample descent (finds high-density regions from scratch)
        // and the detected stratum sample rescored at the probe scale
        // (covers the thin high-density set a volume sample cannot hit
        // away from wherever the descent happened to converge).  The
        // descent cull at half the final cut lets distant candidates
        // migrate towards the high-density tube before the threshold
        // bites.
        let probe = cfg.rho * radius / 20.0;
        let cut = self.e_top - margin;
        let pop = self.descend(scan.evaluated, radius, probe, 64, 3, cut * 0.5)?;
        let mut pinch = Vec::new();
        let mut count = 0usize;
        for (p, v) in &pop {
            if *v > cut && geom::dist(p, &center) <= 2.0 * radius {
                pinch.extend_from_slice(p);
                count += 1;
            }
        }
        for p in self.stratum.chunks_exact(self.n) {
            if geom::dist(p, &center) <= 2.0 * radius {
                if let Some(v) = self.try_vt(p, probe)? {
                    if v > cut {
                        pinch.extend_from_slice(p);
                        count += 1;
                    }
                }
            }
        }
        if count == 0 {
            return Ok(BallNode {
                center,
                radius,
                label: BallLabel::Bad,
                pinch,
                subspace: None,
                children: Vec::new(),
            });
        }

        let (span, basis) = effective_span(&pinch, self.n, probe)?;
        let subspace = subspace_from_basis(&basis, span, self.n, probe)?;
        if span < cfg.k {
            return Ok(BallNode {
                center,
                radius,
                label: BallLabel::Bad,
                pinch,
                subspace: Some(subspace),
                children: Vec::new(),
            });
        }

        // Good ball: lattice cover of the tube around L'.
        let child_r = (cfg.rho * radius).max(cfg.r);
        let centers = self.tube_children(&center, radius, &subspace, child_r);
        let mut children = Vec::new();
        for c in centers {
            if !self.meets_stratum(&c, child_r) {
                continue;
            }
            let node = self.process(c, child_r, depth + 1, None)?;
            children.push(node);
        }
        Ok(BallNode {
            center,
            radius,
            label: BallLabel::Good,
            pinch,
            subspace: Some(subspace),
            children,
        })
    }

    /// Deterministic lattice on the spanned subspace covering the tube
    /// `B_{ρs/10}(L') ∩ B_s(x)` with balls of radius `child_r`: lattice
    /// spacing `1.8·child_r/√k` makes the k-cells fit inside the balls
    /// with the tube width to spare, and exceeds the `child_r/5` needed
    /// for 1/10-radius disjointness.
    fn tube_children(
        &self,
        x: &[f64],
        s: f64,
        subspace: &AffineSubspace,
        child_r: f64,
    ) -> Vec<Vec<f64>> {
        let k = subspace.k();
        let n = self.n;
        // Project the node centre onto L'.
        let diff = geom::sub(x, subspace.base());
        let mut origin = subspace.base().to_vec();
        let frame = subspace.frame();
        for i in 0..k {
            let row = &frame[i * n..(i + 1) * n];
            let c = geom::dot(&diff, row);
            for j in 0..n {
                origin[j] += c * row[j];
            }
        }
        if k == 0 {
            return vec![origin];
        }
        let spacing = 1.8 * child_r / (k as f64).sqrt();
        let reach = s + spacing;
        let steps = (reach / spacing).ceil() as i64;
        let mut centers = Vec::new();
        let mut idx = vec![-steps; k];
        'outer: loop {
            let mut c = origin.clone();
            let mut norm2 = 0.0;
            for i in 0..k {
                let t = idx[i] as f64 * spacing;
                norm2 += t * t;
                let row = &frame[i * n..(i + 1) * n];
                for j in 0..n {
                    c[j] += t * row[j];
                }
            }
            if norm2.sqrt() <= reach {
                centers.push(c);
            }
            for i in 0..k {
                idx[i] += 1;
                if idx[i] <= steps {
                    continue 'outer;
                }
                idx[i] = -steps;
            }
            break;
        }
        centers
    }

    /// True when some detected stratum point lies within `radius` of `c`.
    fn meets_stratum(&self, c: &[f64], radius: f64) -> bool {
        self.stratum
            .chunks_exact(self.n)
            .any(|p| geom::dist(p, c) <= radius)
    }
}

/// Lexicographic point order (deterministic tie-break).
fn lex_cmp(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    a.iter()
        .zip(b.iter())
        .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
        .unwrap_or(core::cmp::Ordering::Equal)
}

/// Keeps at most `keep` of the scored candidates: the top quarter by
/// score is kept unconditionally (the density core must never be thinned
/// away — farthest-point selection alone favours the periphery and would
/// drop interior maximizers), and the remaining slots are filled by
/// greedy farthest-point thinning for spatial diversity.  Ties break
/// towards higher score, then towards the lexicographically smaller
/// point.  The result preserves the candidates' original relative order,
/// so downstream consumers are deterministic.
fn select_spread(cands: Vec<(Vec<f64>, f64)>, keep: usize) -> Vec<(Vec<f64>, f64)> {
    if cands.len() <= keep {
        return cands;
    }
    let m = cands.len();
    let score_cmp = |i: usize, j: usize| {
        cands[j]
            .1
            .partial_cmp(&cands[i].1)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then_with(|| lex_cmp(&cands[i].0, &cands[j].0))
    };
    let mut by_score: Vec<usize> = (0..m).collect();
    by_score.sort_by(|&i, &j| score_cmp(i, j));

    let protected = keep.div_ceil(4).min(keep);
    let mut chosen = vec![false; m];
    let mut order: Vec<usize> = Vec::with_capacity(keep);
    for &i in by_score.iter().take(protected) {
        chosen[i] = true;
        order.push(i);
    }
    let mut min_d = vec![f64::INFINITY; m];
    for i in 0..m {
        if chosen[i] {
            continue;
        }
        for &s in &order {
            let d = geom::dist(&cands[i].0, &cands[s].0);
            if d < min_d[i] {
                min_d[i] = d;
            }
        }
    }
    while order.len() < keep {
        let mut best = usize::MAX;
        for i in 0..m {
            if chosen[i] {
                continue;
            }
            let better = best == usize::MAX
                || min_d[i] > min_d[best]
                || (min_d[i] == min_d[best] && score_cmp(i, best) == core::cmp::Ordering::Less);
            if better {
                best = i;
            }
        }
        if best == usize::MAX {
            break;
        }
        chosen[best] = true;
        order.push(best);
        for i in 0..m {
            if !chosen[i] {
                let d = geom::dist(&cands[i].0, &cands[best].0);
                if d < min_d[i] {
                    min_d[i] = d;
                }
            }
        }
    }
    order.sort_unstable();
    order.into_iter().map(|i| cands[i].clone()).collect()
}

/// Orthonormal affine subspace through the selected span points (the
/// first point is the base).
fn subspace_from_basis(
    basis: &[f64],
    span: usize,
    n: usize,
    rho: f64,
) -> Result<AffineSubspace> {
    let base = basis[..n].to_vec();
    let mut rows = Vec::with_capacity(span * n);
    for i in 1..=span {
        rows.extend(geom::sub(&basis[i * n..(i + 1) * n], &base));
    }
    let frame = geom::orthonormalize(&rows, n, 1e-12 * rho.max(1.0e-300));
    if frame.len() != span * n {
        return Err(Error::BadFrame {
            reason: "span points degenerated during orthonormalisation",
        });
    }
    AffineSubspace::new(base, frame, span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_singular_solution, AffineBump, AnalyticField};
    use crate::params::ProblemParams;

    fn point_model() -> Field {
        let params = ProblemParams::new(5, 2.5).unwrap();
        Field::Analytic(make_singular_solution(params, 0, vec![0.0; 5], Vec::new()).unwrap())
    }

    fn cylinder_model() -> Field {
        let params = ProblemParams::new(6, 3.5).unwrap();
        let mut frame = vec![0.0; 6];
        frame[0] = 1.0;
        Field::Analytic(make_singular_solution(params, 1, vec![0.0; 6], frame).unwrap())
    }

    #[test]
    fn effective_span_examples() {
        // Collinear points: k = 1, never 2.
        let pts = [0.0, 0.0, 1.0, 0.0, 2.0, 0.0, 3.0, 0.0];
        let (k, basis) = effective_span(&pts, 2, 0.1).unwrap();
        assert_eq!(k, 1);
        // Greedy picks the farthest point from x0 = (0,0).
        assert_eq!(&basis[2..4], &[3.0, 0.0]);

        // Square corners with side 4 rho: the third corner has distance
        // 4 rho >= 2 rho to the first edge.
        let rho = 0.25;
        let side = 4.0 * rho;
        let square = [0.0, 0.0, side, 0.0, side, side, 0.0, side];
        let (k, _) = effective_span(&square, 2, rho).unwrap();
        assert_eq!(k, 2);

        // A single point spans zero dimensions.
        let (k, basis) = effective_span(&[0.3, 0.4, 0.5], 3, 0.1).unwrap();
        assert_eq!(k, 0);
        assert_eq!(basis, vec![0.3, 0.4, 0.5]);

        // Points closer than the threshold to the span do not count.
        let tight = [0.0, 0.0, 1.0, 0.0, 0.5, 0.05];
        let (k, _) = effective_span(&tight, 2, 0.1).unwrap();
        assert_eq!(k, 1);
    }

    #[test]
    fn effective_span_tie_breaks_to_lowest_index() {
        // Two maximizers at the same distance: the earlier index wins.
        let pts = [0.0, 0.0, 0.0, 2.0, 0.0, -2.0];
        let (k, basis) = effective_span(&pts, 2, 0.5).unwrap();
        assert_eq!(k, 1);
        assert_eq!(&basis[2..4], &[0.0, 2.0]);
    }

    fn quick_cfg(k: usize, r: f64, big_r: f64) -> CoverConfig {
        let mut cfg = CoverConfig::new(k, 1e-2, r, big_r);
        // Shrink sampling for test speed; the descent still resolves the
        // spine because it concentrates rather than rejects.
        cfg.sample_scale = 0.02;
        cfg
    }

    #[test]
    fn point_singularity_cover_is_a_short_chain() {
        let u = point_model();
        let big_r = 0.5;
        for j in [4, 5, 6, 7] {
            let r = big_r * 0.5f64.powi(j);
            let tree = build_cover_with(&u, &quick_cfg(0, r, big_r), &[0.0; 5]).unwrap();
            assert!(tree.root.is_some());
            tree.check_invariants().unwrap();
            // The stratum is one point: a single chain of nested balls,
            // one terminal leaf.
            assert_eq!(tree.terminal_leaf_count(), 1, "r = {r}");
            assert!(tree.leaf_radii.len() <= 2);
            // k = 0 tally counts leaves.
            assert!(tree.tally <= 2.0);
            // The terminal leaf sits on the singular point.
            let leaves = tree.leaves();
            let term = leaves
                .iter()
                .find(|b| b.label == BallLabel::TerminalR)
                .unwrap();
            assert!(geom::norm(&term.center) <= 0.05 * big_r);
        }
    }

    #[test]
    fn cylinder_cover_tally_is_scale_stable() {
        let u = cylinder_model();
        let big_r = 0.5;
        let mut tallies = Vec::new();
        for j in [4, 5] {
            let r = big_r * 0.5f64.powi(j);
            let tree = build_cover_with(&u, &quick_cfg(1, r, big_r), &[0.0; 6]).unwrap();
            tree.check_invariants().unwrap();
            let terminal = tree.terminal_leaf_count();
            assert!(terminal >= 1);
            // Terminal tally ~ C R for a line segment stratum.
            tallies.push(terminal as f64 * r / big_r);
        }
        let (a, b) = (tallies[0], tallies[1]);
        assert!(
            a / b <= 2.0 && b / a <= 2.0,
            "tally drift {a} vs {b} exceeds 2x"
        );
        // The tally stays of order one (neither collapsing nor exploding).
        assert!(a > 0.2 && a < 8.0, "tally {a}");
    }

    #[test]
    fn smooth_field_yields_an_empty_tree() {
        // Dimension four keeps the generic-field quadrature light; the
        // bounded field's density collapses under the detection threshold
        // within a few descent stages, so no stratum is found.
        let params = ProblemParams::new(4, 3.5).unwrap();
        let u = Field::Analytic(AnalyticField::AffineBump(AffineBump {
            params,
            center: vec![0.0; 4],
            offset: 0.1,
            slope: vec![0.05, 0.0, 0.0, 0.0],
            amplitude: 0.2,
            radius: 1.0,
        }));
        let tree = build_cover_with(&u, &quick_cfg(0, 0.01, 0.5), &[0.0; 4]).unwrap();
        assert!(tree.root.is_none());
        assert!(tree.stratum_sample.is_empty());
        assert_eq!(tree.leaf_radii.len(), 0);
        assert_eq!(tree.tally, 0.0);
        tree.check_invariants().unwrap();
    }

    #[test]
    fn overdimensioned_target_marks_the_root_bad() {
        // Asking for a 1-dimensional stratum of the point singularity:
        // the pinch set clusters at the origin and cannot span a line.
        let u = point_model();
        let tree = build_cover_with(&u, &quick_cfg(1, 0.03125, 0.5), &[0.0; 5]).unwrap();
        let root = tree.root.as_ref().unwrap();
        assert_eq!(root.label, BallLabel::Bad);
        assert!(root.is_leaf());
        // The achieved span is lower-dimensional.
        let sub = root.subspace.as_ref().unwrap();
        assert!(sub.k() < 1 || {
            // A degenerate 1-span can only appear if two pinch points
            // separated: they must then still hug the origin.
            geom::norm(sub.base()) <= 0.1
        });
        // All pinch points lie within rho*s/10 of the recorded subspace.
        let probe_width = tree.rho * tree.big_r / 10.0;
        for p in root.pinch.chunks_exact(5) {
            assert!(sub.distance(p) <= probe_width * (1.0 + 1e-9));
        }
    }

    #[test]
    fn energy_drop_condition_fires_off_the_spine() {
        // Direct check of the Cover2-style drop predicate: away from the
        // singular set the fine-scale density ceiling collapses.
        let u = point_model();
        let cfg = quick_cfg(0, 0.001, 0.5);
        let mut builder = Builder {
            u: &u,
            cfg: &cfg,
            n: 5,
            e_top: 0.0,
            depth_cap: 10,
            stratum: Vec::new(),
            burn: 7,
        };
        let on = builder.sup_scan(&[0.0; 5], 1.0, 0.5).unwrap();
        builder.e_top = on.sup;
        let margin = builder.margin();
        let mut off_center = vec![0.0; 5];
        off_center[0] = 0.3;
        let off = builder.sup_scan(&off_center, 0.02, 0.01).unwrap();
        assert!(
            off.sup <= builder.e_top - margin,
            "off-spine ceiling {} should drop below E - margin = {}",
            off.sup,
            builder.e_top - margin
        );
        // On the spine the ceiling persists.
        let near = builder.sup_scan(&[0.0; 5], 0.02, 0.01).unwrap();
        assert!(near.sup > builder.e_top - margin);
    }

    #[test]
    fn cover_is_deterministic() {
        let u = point_model();
        let t1 = build_cover_with(&u, &quick_cfg(0, 0.03125, 0.5), &[0.0; 5]).unwrap();
        let t2 = build_cover_with(&u, &quick_cfg(0, 0.03125, 0.5), &[0.0; 5]).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn parameter_guards_fire() {
        let u = point_model();
        let err = build_cover_with(&u, &quick_cfg(0, 0.5, 0.25), &[0.0; 5]).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidParameter {
                constraint: "scales out of order",
                ..
            }
        ));
        let mut cfg = quick_cfg(0, 0.01, 0.5);
        cfg.rho = 0.02;
        assert!(matches!(
            build_cover_with(&u, &cfg, &[0.0; 5]),
            Err(Error::InvalidParameter { name: "rho", .. })
        ));
        assert!(matches!(
            build_cover_with(&u, &quick_cfg(0, 0.01, 0.5), &[0.0; 4]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}

