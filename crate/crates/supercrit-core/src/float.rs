//! Float helpers that work in both `std` and `no_std` builds.
//!
//! Under `std` the inherent `f64` methods are used (inherent methods win name
//! resolution over a trait in scope, so importing [`FloatExt`] is harmless).
//! Under `no_std` the same names resolve to the trait below, which forwards to
//! `libm`.  Call sites simply write `x.sqrt()` etc. after
//! `use crate::float::FloatExt;`.

/// Transcendental and sign operations on `f64` available without `std`.
#[allow(dead_code)]
pub(crate) trait FloatExt {
    fn abs(self) -> f64;
    fn sqrt(self) -> f64;
    fn cbrt(self) -> f64;
    fn powf(self, e: f64) -> f64;
    fn powi(self, e: i32) -> f64;
    fn exp(self) -> f64;
    fn ln(self) -> f64;
    fn log2(self) -> f64;
    fn sin(self) -> f64;
    fn cos(self) -> f64;
    fn tan(self) -> f64;
    fn acos(self) -> f64;
    fn asin(self) -> f64;
    fn atan2(self, x: f64) -> f64;
    fn hypot(self, x: f64) -> f64;
    fn floor(self) -> f64;
    fn ceil(self) -> f64;
    fn round(self) -> f64;
    fn signum(self) -> f64;
    fn copysign(self, sign: f64) -> f64;
}

impl FloatExt for f64 {
    #[inline]
    fn abs(self) -> f64 {
        libm::fabs(self)
    }
    #[inline]
    fn sqrt(self) -> f64 {
        libm::sqrt(self)
    }
    #[inline]
    fn cbrt(self) -> f64 {
        libm::cbrt(self)
    }
    #[inline]
    fn powf(self, e: f64) -> f64 {
        libm::pow(self, e)
    }
    #[inline]
    fn powi(self, e: i32) -> f64 {
        // Exponentiation by squaring keeps integer powers exact-ish and
        // avoids the pow(x, f64) path for the common small exponents.
        let mut base = if e < 0 { 1.0 / self } else { self };
        let mut k = e.unsigned_abs();
        let mut acc = 1.0;
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        acc
    }
    #[inline]
    fn exp(self) -> f64 {
        libm::exp(self)
    }
    #[inline]
    fn ln(self) -> f64 {
        libm::log(self)
    }
    #[inline]
    fn log2(self) -> f64 {
        libm::log2(self)
    }
    #[inline]
    fn sin(self) -> f64 {
        libm::sin(self)
    }
    #[inline]
    fn cos(self) -> f64 {
        libm::cos(self)
    }
    #[inline]
    fn tan(self) -> f64 {
        libm::tan(self)
    }
    #[inline]
    fn acos(self) -> f64 {
        libm::acos(self)
    }
    #[inline]
    fn asin(self) -> f64 {
        libm::asin(self)
    }
    #[inline]
    fn atan2(self, x: f64) -> f64 {
        libm::atan2(self, x)
    }
    #[inline]
    fn hypot(self, x: f64) -> f64 {
        libm::hypot(self, x)
    }
    #[inline]
    fn floor(self) -> f64 {
        libm::floor(self)
    }
    #[inline]
    fn ceil(self) -> f64 {
        libm::ceil(self)
    }
    #[inline]
    fn round(self) -> f64 {
        libm::round(self)
    }
    #[inline]
    fn signum(self) -> f64 {
        if self.is_nan() {
            f64::NAN
        } else if self.to_bits() >> 63 == 1 {
            -1.0
        } else {
            1.0
        }
    }
    #[inline]
    fn copysign(self, sign: f64) -> f64 {
        libm::copysign(self, sign)
    }
}
