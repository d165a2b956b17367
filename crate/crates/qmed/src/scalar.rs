//! Scalar abstraction: the real field underlying all matrix arithmetic.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the whole crate is generic over.
///
/// Everything downstream (eigensolver, NNLS, fixed-point iteration) only
/// needs ordinary float arithmetic, so `f32` and `f64` both qualify. The
/// default tolerances in [`crate::tol`] are calibrated for `f64`; at `f32`
/// they must be loosened by the caller.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal (typically a tolerance) into the working scalar.
#[inline]
pub fn real<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal converts to scalar")
}

/// Converts a default tolerance with a precision floor of `64 * epsilon`,
/// so the f64-calibrated defaults remain meaningful for coarser scalars.
#[inline]
pub fn real_tol<T: Scalar>(x: f64) -> T {
    real::<T>(x).max(T::epsilon() * real::<T>(64.0))
}

/// Default tolerances, stated in `f64`. Callers convert via [`real`].
pub mod tol {
    /// Slack allowed below zero when deciding positive semidefiniteness.
    pub const PSD: f64 = 1e-9;
    /// Allowed defect when a set of operators must reconstruct a target
    /// (eigendecomposition, completeness of a POVM, square roots).
    pub const RECONSTRUCT: f64 = 1e-8;
    /// Relative eigenvalue cutoff below which a PSD matrix is treated as
    /// rank-deficient.
    pub const RANK: f64 = 1e-10;
    /// Hermiticity defect admitted at construction time.
    pub const HERMITICITY: f64 = 1e-12;
    /// Allowed deviation of prior probabilities from a unit sum.
    pub const PRIOR_SUM: f64 = 1e-12;
    /// Allowed unitarity defect of generating unitaries.
    pub const UNITARITY: f64 = 1e-9;
    /// Default tolerance for optimality certification. Looser than the
    /// kernel tolerances so oracle convergence error is absorbed.
    pub const CERTIFY: f64 = 1e-7;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_converts_literals() {
        let x: f64 = real(1e-9);
        assert_eq!(x, 1e-9);
        let y: f32 = real(0.5);
        assert_eq!(y, 0.5f32);
    }

    #[test]
    fn tolerance_ordering() {
        assert!(tol::HERMITICITY < tol::RANK);
        assert!(tol::RANK < tol::PSD);
        assert!(tol::PSD < tol::RECONSTRUCT);
        assert!(tol::RECONSTRUCT < tol::CERTIFY);
    }
}
