//! Error types shared by every module of the crate.

use core::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong while validating inputs or running the
/// numerical routines.
///
/// Variants are grouped by flavour: construction/validation errors (bad
/// parameters, mismatched shapes), domain errors (a requested ball leaves the
/// field's domain), and numerical guards (resolution too coarse, iteration
/// caps).  All carry enough context to format an actionable message.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// `p` is not strictly above the critical exponent `(n+2)/(n-2)`, or
    /// `n < 3`.
    SupercriticalityViolated {
        /// Ambient dimension.
        n: usize,
        /// Nonlinearity exponent.
        p: f64,
    },
    /// The singular model with an `m`-dimensional spine has no locally finite
    /// energy: `alpha_p >= n - m`.
    EnergyNonIntegrable {
        /// Ambient dimension.
        n: usize,
        /// Spine dimension.
        m: usize,
        /// The energy-density weight `2(p+1)/(p-1)`.
        alpha_p: f64,
    },
    /// A supplied frame is not an orthonormal family of the expected size.
    BadFrame {
        /// Human-readable reason (wrong count, not unit, not orthogonal...).
        reason: &'static str,
    },
    /// A requested point or ball is not contained in the field's domain.
    OutOfDomain {
        /// Which operation noticed the violation.
        what: &'static str,
    },
    /// A quadrature pass produced a NaN or infinite value.
    NonFiniteIntegrand,
    /// A grid-based ball integral would use fewer cells than the trusted
    /// minimum.
    BallTooSmall {
        /// Cells actually available inside the ball.
        cells: usize,
        /// Minimum number of cells required.
        needed: usize,
    },
    /// A measure restricted to the requested ball has no support there.
    EmptyRestriction,
    /// Two objects that must live in the same dimension do not.
    DimensionMismatch {
        /// Dimension expected by the operation.
        expected: usize,
        /// Dimension actually supplied.
        got: usize,
    },
    /// A derivative order outside the supported range was requested.
    UnsupportedOrder {
        /// Requested order.
        j: usize,
        /// Largest supported order for this field kind.
        max: usize,
    },
    /// Input balls to a packing check overlap.
    OverlappingBalls {
        /// Index of the first offending ball.
        i: usize,
        /// Index of the second offending ball.
        j: usize,
    },
    /// A voxelisation was requested with fewer voxels per radius than the
    /// trusted minimum.
    ResolutionTooCoarse {
        /// Voxels per tube radius actually implied.
        voxels_per_radius: usize,
        /// Minimum required.
        needed: usize,
    },
    /// The covering recursion exceeded its depth cap.
    NonTermination {
        /// Depth cap that was exceeded.
        depth_cap: usize,
    },
    /// A cutoff profile was evaluated at a negative argument.
    NegativeArgument {
        /// Offending argument.
        t: f64,
    },
    /// A scalar parameter failed validation (non-finite, non-positive, out of
    /// the documented range...).
    InvalidParameter {
        /// Name of the offending parameter.
        name: &'static str,
        /// Human-readable constraint that was violated.
        constraint: &'static str,
    },
    /// Grid construction data is inconsistent (shape/value-count mismatch,
    /// too few entries per axis, non-positive spacing).
    BadGrid {
        /// Human-readable reason.
        reason: &'static str,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SupercriticalityViolated { n, p } => write!(
                f,
                "p = {p} is not supercritical for n = {n} (need n >= 3 and p > (n+2)/(n-2))"
            ),
            Error::EnergyNonIntegrable { n, m, alpha_p } => write!(
                f,
                "singular model with spine dimension m = {m} in R^{n} has non-integrable \
                 energy density (alpha_p = {alpha_p} >= n - m)"
            ),
            Error::BadFrame { reason } => write!(f, "bad frame: {reason}"),
            Error::OutOfDomain { what } => {
                write!(f, "{what}: requested ball leaves the field's domain")
            }
            Error::NonFiniteIntegrand => write!(f, "quadrature produced a non-finite value"),
            Error::BallTooSmall { cells, needed } => write!(
                f,
                "grid ball integral would use {cells} cells but at least {needed} are required"
            ),
            Error::EmptyRestriction => {
                write!(f, "measure restricted to the requested ball is empty")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::UnsupportedOrder { j, max } => {
                write!(f, "derivative order {j} unsupported (max {max})")
            }
            Error::OverlappingBalls { i, j } => {
                write!(f, "input balls {i} and {j} overlap")
            }
            Error::ResolutionTooCoarse {
                voxels_per_radius,
                needed,
            } => write!(
                f,
                "voxel resolution too coarse: {voxels_per_radius} voxels per radius, \
                 need at least {needed}"
            ),
            Error::NonTermination { depth_cap } => {
                write!(f, "covering recursion exceeded its depth cap of {depth_cap}")
            }
            Error::NegativeArgument { t } => {
                write!(f, "cutoff profile evaluated at negative argument t = {t}")
            }
            Error::InvalidParameter { name, constraint } => {
                write!(f, "invalid parameter {name}: {constraint}")
            }
            Error::BadGrid { reason } => write!(f, "bad grid: {reason}"),
        }
    }
}

impl core::error::Error for Error {}
