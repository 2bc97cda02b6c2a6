//! Central numerical tolerances.
//!
//! Every comparison threshold used by the library lives here with a short
//! justification, so that accuracy expectations are auditable in one place
//! and tests can reference the same constants as the code they exercise.

/// Identities that should hold to machine precision up to a handful of
/// rounding steps (exponent relations, closed-form substitutions, exact
/// scale covariance of quadrature rules).
pub const EXACT_F64: f64 = 1e-12;

/// Residual threshold for closed-form differential identities evaluated
/// pointwise (e.g. the PDE residual of a singular model away from its
/// spine).  The terms are O(1)–O(10^2) at unit distance, so 1e-10 leaves
/// four orders of headroom over accumulated rounding.
pub const ANALYTIC_RESIDUAL: f64 = 1e-10;

/// Orthonormality defect tolerated in a stored frame: absolute deviation of
/// pairwise dot products from the Kronecker delta.
pub const FRAME_ORTHONORMAL: f64 = 1e-12;

/// Convergence threshold for the cyclic Jacobi eigensolver, as a fraction of
/// the matrix trace: sweeps stop once the largest off-diagonal magnitude
/// drops below `JACOBI_OFFDIAG * trace`.
pub const JACOBI_OFFDIAG: f64 = 1e-13;

/// Agreement expected between an eigen-decomposition and its defining
/// identities (residual `|M v - lambda v|`, moment identities), scaled by
/// `lambda_max + 1`.
pub const EIGEN_RESIDUAL: f64 = 1e-10;

/// Relative tolerance for comparing two independent quadrature routes on the
/// same smooth integral (reduced symmetry-adapted rule vs. generic product
/// rule at moderate node counts).
pub const QUADRATURE_CROSS_CHECK: f64 = 1e-6;

/// Floor added to every reported quadrature tolerance, as a fraction of the
/// value's magnitude.  Node-doubling estimates can spuriously report zero
/// when both rules land on the same rounded value; downstream sign checks
/// (monotonicity of the smoothed density) still need a few ulps of slack.
pub const TOL_FLOOR_REL: f64 = 1e-12;

/// Absolute floor for reported quadrature tolerances, for values near zero.
pub const TOL_FLOOR_ABS: f64 = 1e-14;

/// Largest relative magnitude the integrality test for `alpha_p` accepts as
/// "integer": `alpha_p` is a ratio of small user-supplied quantities, so any
/// intended integer value is represented to far better than this.
pub const INTEGRALITY: f64 = 1e-9;

/// Bisection width at which scale searches (regularity scale, root finding
/// against closed forms) stop.  Chosen well below the 1e-6 agreement the
/// closed-form cross-checks demand.
pub const BISECTION_WIDTH: f64 = 1e-9;

#[cfg(test)]
mod tests {
    use super::*;

    /// The floors must be strictly tighter than the thresholds that rely on
    /// them, otherwise the floor would mask a real failure.
    #[test]
    fn floors_are_ordered() {
        assert!(TOL_FLOOR_ABS < TOL_FLOOR_REL);
        assert!(TOL_FLOOR_REL < ANALYTIC_RESIDUAL);
        assert!(EXACT_F64 < ANALYTIC_RESIDUAL);
        assert!(JACOBI_OFFDIAG < EIGEN_RESIDUAL);
        assert!(BISECTION_WIDTH < 1e-6);
    }
}
