//! Scalar abstraction: every distribution and solver in this crate is generic
//! over a floating-point type implementing [`Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar for all distribution arithmetic (f32 or f64).
///
/// The associated tolerances scale with the precision of the type; the f64
/// values are the canonical ones used throughout the test suite.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + 'static
{
    /// Weight sums within this of 1 are accepted as-is.
    fn weight_tol() -> Self;
    /// Weight sums within this of 1 are renormalized; farther off is an error.
    fn renorm_tol() -> Self;
    /// Residual target for bisection root finding.
    fn root_tol() -> Self;
}

impl Real for f64 {
    fn weight_tol() -> f64 {
        1e-12
    }
    fn renorm_tol() -> f64 {
        1e-9
    }
    fn root_tol() -> f64 {
        1e-12
    }
}

impl Real for f32 {
    fn weight_tol() -> f32 {
        1e-5
    }
    fn renorm_tol() -> f32 {
        1e-3
    }
    fn root_tol() -> f32 {
        1e-6
    }
}

/// Converts an f64 constant into `T`. Panics only if `T` cannot represent
/// small literal constants, which no `Real` type does.
pub(crate) fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("constant representable in scalar type")
}
