//! Scalar field abstraction: all algorithms are generic over real (`f64`) and
//! complex (`Complex<f64>`) double precision.

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rand::Rng;

/// Element type of all matrices. Implemented for `f64` and `Complex64`.
///
/// Conjugation is an involution; for real scalars it is the identity.
pub trait Scalar:
    Copy
    + Clone
    + Debug
    + Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    const ZERO: Self;
    const ONE: Self;

    /// Short name used in reports and CSV output ("real" or "complex").
    const FIELD_NAME: &'static str;

    fn conj(self) -> Self;

    /// Squared magnitude |x|^2 as a real number.
    fn abs_sq(self) -> f64;

    fn abs(self) -> f64 {
        self.abs_sq().sqrt()
    }

    fn re(self) -> f64;
    fn im(self) -> f64;

    fn from_re(x: f64) -> Self;

    /// Multiply by a real scalar.
    fn scale(self, f: f64) -> Self;

    /// Divide by a real scalar.
    fn unscale(self, f: f64) -> Self {
        self.scale(1.0 / f)
    }

    /// Draw one value with every component uniform in `[lo, hi)`.
    fn sample_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Self;

    /// Exact bit pattern, for bitwise (untouched-memory) comparisons.
    fn to_bits(self) -> u128;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    const FIELD_NAME: &'static str = "real";

    #[inline(always)]
    fn conj(self) -> Self {
        self
    }

    #[inline(always)]
    fn abs_sq(self) -> f64 {
        self * self
    }

    #[inline(always)]
    fn re(self) -> f64 {
        self
    }

    #[inline(always)]
    fn im(self) -> f64 {
        0.0
    }

    #[inline(always)]
    fn from_re(x: f64) -> Self {
        x
    }

    #[inline(always)]
    fn scale(self, f: f64) -> Self {
        self * f
    }

    fn sample_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Self {
        lo + (hi - lo) * rng.random::<f64>()
    }

    #[inline(always)]
    fn to_bits(self) -> u128 {
        f64::to_bits(self) as u128
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    const ONE: Self = Complex64::new(1.0, 0.0);
    const FIELD_NAME: &'static str = "complex";

    #[inline(always)]
    fn conj(self) -> Self {
        Complex64::new(self.re, -self.im)
    }

    #[inline(always)]
    fn abs_sq(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    #[inline(always)]
    fn re(self) -> f64 {
        self.re
    }

    #[inline(always)]
    fn im(self) -> f64 {
        self.im
    }

    #[inline(always)]
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }

    #[inline(always)]
    fn scale(self, f: f64) -> Self {
        Complex64::new(self.re * f, self.im * f)
    }

    fn sample_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Self {
        // Real component first, then imaginary: the draw order is part of the
        // deterministic generator contract.
        let re = lo + (hi - lo) * rng.random::<f64>();
        let im = lo + (hi - lo) * rng.random::<f64>();
        Complex64::new(re, im)
    }

    #[inline(always)]
    fn to_bits(self) -> u128 {
        ((f64::to_bits(self.re) as u128) << 64) | (f64::to_bits(self.im) as u128)
    }
}
