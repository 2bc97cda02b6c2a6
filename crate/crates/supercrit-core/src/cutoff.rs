//! The fixed C² cutoff profile behind the smoothed energy density.
//!
//! The smoothed density integrates against `φ(|y - x|^2 / r^2)`, where `φ`
//! is a fixed nonincreasing profile with
//!
//! * support contained in `[0, 10)`;
//! * `φ' = -1` exactly on `[0, 8]` (so `-2 <= φ' <= -1` there);
//! * `φ' < 0` on `[0, 9]` and `|φ''| + |φ'| <= 100` everywhere;
//! * C² regularity across the ramp.
//!
//! Concretely the slope rises from `-1` to `0` along a quintic smoothstep on
//! `(8, 9.5)` and vanishes beyond, and `φ(t) = ∫_t^∞ (-φ')` — which makes
//! `φ(0) = 8.75` and `φ(4) = 4.75` closed-form anchors for tests.

#[allow(unused_imports)]
use crate::float::FloatExt;

use crate::error::{Error, Result};

/// Start of the slope ramp: `φ' = -1` exactly on `[0, RAMP_START]`.
pub const RAMP_START: f64 = 8.0;
/// End of the slope ramp: `φ` and `φ'` vanish at and beyond this point.
pub const RAMP_END: f64 = 9.5;
/// `φ(0)`: total mass of `-φ'` over `[0, ∞)` = 8 + ramp mass 0.75.
pub const PHI_AT_ZERO: f64 = 8.75;

/// Evaluator for the cutoff profile; stateless, but a type keeps the profile
/// and its derivative paired and lets call sites hold a validated handle.
#[derive(Debug, Clone, Copy, Default)]
pub struct CutoffPhi;

/// Quintic smoothstep `S(s) = s^3 (6 s^2 - 15 s + 10)`: C² with
/// `S(0) = 0`, `S(1) = 1`, vanishing first and second derivatives at both
/// ends, and `∫_0^x S = x^6 - 3 x^5 + 2.5 x^4`.
#[inline]
fn smoothstep(s: f64) -> f64 {
    s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
}

/// Antiderivative `∫_0^x S(s) ds` of the quintic smoothstep.
#[inline]
fn smoothstep_integral(x: f64) -> f64 {
    let x4 = x * x * x * x;
    x4 * (2.5 + x * (-3.0 + x))
}

impl CutoffPhi {
    /// Creates the profile handle.
    #[must_use]
    pub fn new() -> Self {
        CutoffPhi
    }

    /// Evaluates `(φ(t), φ'(t))` for `t >= 0`.
    ///
    /// Fails with [`Error::NegativeArgument`] for `t < 0`: the profile is
    /// only ever composed with squared-distance arguments, so a negative
    /// input indicates a caller bug rather than a value to extrapolate.
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        if t < 0.0 {
            return Err(Error::NegativeArgument { t });
        }
        Ok(if t <= RAMP_START {
            // φ' = -1, φ(t) = φ(0) - t.
            (PHI_AT_ZERO - t, -1.0)
        } else if t < RAMP_END {
            // On the ramp φ'(t) = -S((RAMP_END - t) / w) with w = 1.5, so
            // the slope rises C²-smoothly from -1 at t = 8 to 0 at t = 9.5.
            let w = RAMP_END - RAMP_START;
            let s = (RAMP_END - t) / w;
            // φ(t) = ∫_t^{RAMP_END} (-φ') = w ∫_0^s S.
            (w * smoothstep_integral(s), -smoothstep(s))
        } else {
            (0.0, 0.0)
        })
    }

    /// `φ(t)` alone.
    pub fn value(&self, t: f64) -> Result<f64> {
        self.eval(t).map(|(v, _)| v)
    }

    /// `φ'(t)` alone.
    pub fn slope(&self, t: f64) -> Result<f64> {
        self.eval(t).map(|(_, d)| d)
    }

    /// Infallible `(φ(t), φ'(t))` for call sites whose argument is a squared
    /// quantity and therefore nonnegative by construction.
    #[inline]
    pub(crate) fn eval_nonneg(&self, t: f64) -> (f64, f64) {
        debug_assert!(t >= 0.0);
        if t <= RAMP_START {
            (PHI_AT_ZERO - t, -1.0)
        } else if t < RAMP_END {
            let w = RAMP_END - RAMP_START;
            let s = (RAMP_END - t) / w;
            (w * smoothstep_integral(s), -smoothstep(s))
        } else {
            (0.0, 0.0)
        }
    }
}
