use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the numerical side of the crate is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances in this crate are tuned for
/// `f64`; with `f32` the iterative routines still terminate but only reach
/// single-precision accuracy.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite real converts to f64")
    }

    /// Fractional part in `[0, 1)`.
    #[inline]
    fn frac(self) -> Self {
        let r = self - self.floor();
        if r >= Self::one() {
            Self::zero()
        } else {
            r
        }
    }

    /// Working tolerance: `max(floor, 4 eps)`.
    #[inline]
    fn tol(floor: f64) -> Self {
        Self::lit(floor).max(Self::epsilon() * Self::lit(4.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

/// `exp(2 pi i t)` with `t` first reduced mod 1.
#[inline]
pub fn cis_turns<T: Real>(t: T) -> Complex<T> {
    let theta = T::TAU() * t.frac();
    Complex::new(theta.cos(), theta.sin())
}
