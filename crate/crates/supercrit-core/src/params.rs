//! Validated problem parameters and the derived scaling exponents.

#[allow(unused_imports)]
use crate::float::FloatExt;

use crate::error::{Error, Result};
use crate::tolerances;

/// Ambient dimension, nonlinearity exponent, and the two derived weights
/// that control every scaling law in the crate.
///
/// Invariants (enforced by [`ProblemParams::new`]):
///
/// * `n >= 3` and `p > (n+2)/(n-2)` (supercritical range);
/// * `alpha = 2/(p-1)`;
/// * `alpha_p = 2(p+1)/(p-1)`, which lands in `(2, n)` exactly in the
///   supercritical range and satisfies `alpha_p = alpha (p+1) = 2 (alpha+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    n: usize,
    p: f64,
    alpha: f64,
    alpha_p: f64,
}

impl ProblemParams {
    /// Validates `(n, p)` and precomputes the derived exponents.
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::InvalidParameter {
                name: "p",
                constraint: "must be finite",
            });
        }
        if n < 3 || p <= (n as f64 + 2.0) / (n as f64 - 2.0) {
            return Err(Error::SupercriticalityViolated { n, p });
        }
        let alpha = 2.0 / (p - 1.0);
        let alpha_p = 2.0 * (p + 1.0) / (p - 1.0);
        Ok(Self {
            n,
            p,
            alpha,
            alpha_p,
        })
    }

    /// Ambient dimension `n`.
    #[inline]
    #[must_use]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Nonlinearity exponent `p`.
    #[inline]
    #[must_use]
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Blow-up weight `alpha = 2/(p-1)`: the model scaling is
    /// `u_r(y) = r^alpha u(x + r y)`.
    #[inline]
    #[must_use]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Energy-density weight `alpha_p = 2(p+1)/(p-1) in (2, n)`.
    #[inline]
    #[must_use]
    pub fn alpha_p(&self) -> f64 {
        self.alpha_p
    }

    /// The first stratum index whose corresponding singular model could
    /// carry locally finite energy:
    /// `n - floor(alpha_p)` when `alpha_p` is not an integer, and
    /// `n - alpha_p + 1` when it is.
    ///
    /// Integrality is decided up to [`tolerances::INTEGRALITY`] relative
    /// slack, since `alpha_p` is computed from user-supplied floats.
    #[must_use]
    pub fn k_threshold(&self) -> usize {
        let ap = self.alpha_p;
        let nearest = ap.round();
        if (ap - nearest).abs() <= tolerances::INTEGRALITY * ap.max(1.0) {
            self.n - nearest as usize + 1
        } else {
            self.n - ap.floor() as usize
        }
    }
}
