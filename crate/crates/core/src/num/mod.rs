//! Scalar abstractions shared by the double and extended precision paths.
//!
//! Everything on the approximation side (Fourier windows, Hankel sections,
//! polynomial roots, interpolation) is generic over [`Real`], implemented
//! for `f64` and for the 512-bit [`Mp`] type.

pub mod cx;
pub mod fft;
pub mod linalg;
pub mod mp;
pub mod poly;
pub mod quad;

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub use mp::Mp;
pub use num_complex::Complex;

/// Complex number over a [`Real`] scalar.
pub type C<R> = Complex<R>;

/// Double precision complex number.
pub type C64 = Complex<f64>;

/// Real scalar used by the generic numerical kernels.
pub trait Real:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Send
    + Sync
    + 'static
    + num_traits::Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    /// Short tag used in reports ("f64", "mp512").
    const NAME: &'static str;

    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Unit roundoff of the format.
    fn epsilon() -> Self;
    fn pi() -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn atan(&self) -> Self;
    fn is_finite(&self) -> bool;

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn sqr(&self) -> Self {
        self.clone() * self
    }

    /// Integer power by repeated squaring.
    fn powi(&self, n: i64) -> Self {
        let mut base = if n < 0 {
            Self::one() / self
        } else {
            self.clone()
        };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * &base;
            }
        }
        acc
    }

    /// `self^p` for `self > 0`.
    fn powf(&self, p: &Self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        (self.ln() * p).exp()
    }

    /// Four-quadrant arctangent of `self / x`.
    fn atan2(&self, x: &Self) -> Self {
        let y = self;
        let zero = Self::zero();
        if x.is_zero() {
            return if *y > zero {
                Self::pi() / Self::from_f64(2.0)
            } else if *y < zero {
                -(Self::pi() / Self::from_f64(2.0))
            } else {
                zero
            };
        }
        if y.abs() > x.abs() {
            let base = Self::pi() / Self::from_f64(2.0) - (x.clone() / y).atan();
            if *y > zero {
                base
            } else {
                base - Self::pi()
            }
        } else {
            let a = (y.clone() / x).atan();
            if *x > zero {
                a
            } else if *y >= zero {
                a + Self::pi()
            } else {
                a - Self::pi()
            }
        }
    }

    /// `sqrt(a^2 + b^2)` without intermediate overflow.
    fn hypot(&self, other: &Self) -> Self {
        let a = self.abs();
        let b = other.abs();
        let (big, small) = if a > b { (a, b) } else { (b, a) };
        if big.is_zero() {
            return big;
        }
        let q = small / &big;
        big * (Self::one() + q.sqr()).sqrt()
    }
}

impl Real for f64 {
    const NAME: &'static str = "f64";

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn atan(&self) -> Self {
        f64::atan(*self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn powi(&self, n: i64) -> Self {
        if n.abs() < i32::MAX as i64 {
            f64::powi(*self, n as i32)
        } else {
            f64::powf(*self, n as f64)
        }
    }
    fn powf(&self, p: &Self) -> Self {
        f64::powf(*self, *p)
    }
    fn atan2(&self, x: &Self) -> Self {
        f64::atan2(*self, *x)
    }
    fn hypot(&self, other: &Self) -> Self {
        f64::hypot(*self, *other)
    }
}

/// Lift a double precision complex number.
pub fn lift<R: Real>(z: C64) -> C<R> {
    C::new(R::from_f64(z.re), R::from_f64(z.im))
}

/// Round a complex number to double precision.
pub fn lower<R: Real>(z: &C<R>) -> C64 {
    C64::new(z.re.to_f64(), z.im.to_f64())
}

/// Natural logarithm of a positive value given in the working format,
/// returned in double precision. Safe for magnitudes far below the f64 range.
pub fn ln_to_f64<R: Real>(x: &R) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let d = x.to_f64();
    if d != 0.0 && d.is_finite() {
        d.abs().ln()
    } else {
        x.abs().ln().to_f64()
    }
}
