//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the solvers are generic over: `f32` or `f64`.
///
/// Tolerances throughout the crate are stated for `f64`; with `f32` the
/// iterative routines stop at the precision floor instead.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// `|x|^{p−2} x` with the convention that it vanishes at `x = 0`;
    /// for `p = 1` this is `sgn(x)`.
    fn signed_pow(self, p: Self) -> Self {
        if self == Self::zero() {
            Self::zero()
        } else if p == Self::one() {
            self.signum()
        } else {
            self.signum() * self.abs().powf(p - Self::one())
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_pow_conventions() {
        assert_eq!(0.0f64.signed_pow(1.5), 0.0);
        assert_eq!((-3.0f64).signed_pow(1.0), -1.0);
        assert!(((-4.0f64).signed_pow(1.5) + 2.0).abs() < 1e-15);
        assert!((4.0f32.signed_pow(1.5) - 2.0).abs() < 1e-6);
    }
}
