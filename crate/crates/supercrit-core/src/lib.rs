//! Numerical toolkit for quantitative stratification of supercritical
//! semilinear elliptic fields.
//!
//! The crate works with scalar fields `u` on subsets of `R^n` that solve (or
//! approximately solve) `-Δu = |u|^{p-1} u` in the supercritical range
//! `p > (n+2)/(n-2)`, `n >= 3`.  Everything is organised around a few scaling
//! exponents: `alpha = 2/(p-1)` (the blow-up weight) and
//! `alpha_p = 2(p+1)/(p-1)` (the energy-density weight), with
//! `alpha_p = alpha (p+1) = 2 (alpha + 1)`.
//!
//! The modules provide, in rough dependency order:
//!
//! * [`params`] — validated problem parameters `(n, p)` and derived exponents;
//! * [`geom`] — small dense vector/matrix helpers, ball volumes, sphere areas;
//! * [`quad`] — Gauss–Legendre rules, deterministic sphere point sets, Halton
//!   low-discrepancy sampling, and a generic product rule over balls;
//! * [`field`] — grid-sampled and closed-form fields, singular model
//!   solutions, blow-ups, and grid sampling;
//! * [`cutoff`] — the fixed C² cutoff profile used by the smoothed density;
//! * [`reduce`] — symmetry-reduced ball quadrature for integrands that only
//!   depend on the distance to an affine singular plane;
//! * [`density`] — the two energy densities `theta` and `vartheta`, the
//!   monotonicity gap `W`, radial deficits, and Euler–Lagrange residuals;
//! * [`jacobi`] — a deterministic cyclic Jacobi eigensolver;
//! * [`measure`] — weighted discrete measures;
//! * [`subspace`] — second-moment spectra, best-fit affine subspaces,
//!   displacement functionals, and distances between subspaces and measures;
//! * [`symmetry`] — quantitative symmetry probes, strata membership, and
//!   regularity scales;
//! * [`covering`] — the good/bad-ball covering tree construction;
//! * [`reifenberg`] — discrete Reifenberg packing checks;
//! * [`volume`] — tube volumes, Minkowski contents, and superlevel tails.
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std` feature
//! only toggles which float implementations back the transcendental calls.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

pub mod cutoff;
pub mod density;
pub mod error;
pub(crate) mod float;
pub mod geom;
pub mod jacobi;
pub mod measure;
pub mod params;
pub mod quad;
pub mod reduce;
pub mod subspace;
pub mod symmetry;
pub mod tolerances;

pub mod covering;
pub mod field;
pub mod reifenberg;
pub mod volume;

pub use error::{Error, Result};
pub use params::ProblemParams;
