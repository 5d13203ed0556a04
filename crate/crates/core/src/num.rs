//! Scalar abstraction and small numeric helpers shared by every module.

use std::fmt::{Debug, Display};

use num_bigint::BigUint;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive, Zero};
use rustfft::FftNum;

/// Floating point scalar the numerical core is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Debug + Display + Default
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Converts a count into the scalar type.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, value: T) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation = self.compensation + ((self.sum - t) + value);
        } else {
            self.compensation = self.compensation + ((value - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.compensation
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().collect::<CompensatedSum<T>>().value()
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Natural logarithm of a big integer; `-inf` for zero.
pub fn big_ln(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().expect("64-bit mantissa");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Rounding direction for [`big_from_ln`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Down,
    Up,
    Nearest,
}

/// Big integer closest (in the requested direction) to `exp(ln_value)`.
///
/// Only the leading 52 bits are meaningful; lower bits are zero.
pub fn big_from_ln(ln_value: f64, rounding: Rounding) -> BigUint {
    if ln_value == f64::NEG_INFINITY || ln_value < -745.0 {
        return if rounding == Rounding::Up && ln_value.is_finite() {
            BigUint::from(1u8)
        } else {
            BigUint::zero()
        };
    }
    if ln_value < 700.0 {
        let x = ln_value.exp();
        let r = match rounding {
            Rounding::Down => x.floor(),
            Rounding::Up => x.ceil(),
            Rounding::Nearest => x.round(),
        };
        return BigUint::from_f64(r).unwrap_or_default();
    }
    // exp(ln) = 2^k * exp(rem) with rem in [0, ln 2)
    let k = (ln_value / std::f64::consts::LN_2).floor() - 52.0;
    let mantissa = (ln_value - k * std::f64::consts::LN_2).exp();
    let m = match rounding {
        Rounding::Down => mantissa.floor(),
        Rounding::Up => mantissa.ceil(),
        Rounding::Nearest => mantissa.round(),
    };
    BigUint::from_f64(m).unwrap_or_default() << (k as u64)
}

/// Floor of a non-negative real as a big integer, via its logarithm when large.
pub fn big_floor<T: Real>(x: T) -> BigUint {
    let x = x.to_f64_lossy();
    if !(x > 0.0) {
        return BigUint::zero();
    }
    if x < 9.0e15 {
        BigUint::from_f64(x.floor()).unwrap_or_default()
    } else {
        big_from_ln(x.ln(), Rounding::Down)
    }
}
