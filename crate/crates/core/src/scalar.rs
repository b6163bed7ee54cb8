use std::fmt::{Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating point scalar used throughout the numerical modules: `f32` or `f64`.
///
/// `abs` and `signum` exist on both `Float` and `Signed`, so call them as
/// `Float::abs(x)` in generic code.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + FftNum + Sum + Display + LowerExp + Default
{
    /// Lossy conversion from an `f64` literal.
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
        self.to_f64().expect("finite scalar")
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + FftNum + Sum + Display + LowerExp + Default
{
}

/// `e^{2 pi i t}` for `t` measured in turns.
#[inline]
pub fn cis_turns<T: Real>(t: T) -> Complex<T> {
    let angle = T::TAU() * t;
    Complex::new(angle.cos(), angle.sin())
}

/// Fractional part in `[0, 1)`, also for negative inputs.
#[inline]
pub fn frac<T: Real>(x: T) -> T {
    let f = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if f >= T::one() {
        T::zero()
    } else {
        f
    }
}

/// Distance on the circle `R/Z`.
#[inline]
pub fn circle_distance<T: Real>(a: T, b: T) -> T {
    let d = frac(a - b);
    d.min(T::one() - d)
}
