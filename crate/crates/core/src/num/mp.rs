//! 512-bit binary floating point scalar backed by `astro-float`.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_traits::{Num, One, Zero};

use super::Real;

/// Working precision in bits.
pub const MP_BITS: usize = 512;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Extended precision real number (about 154 decimal digits).
#[derive(Clone)]
pub struct Mp(BigFloat);

impl Mp {
    pub fn from_big(b: BigFloat) -> Self {
        Mp(b)
    }

    pub fn as_big(&self) -> &BigFloat {
        &self.0
    }

    /// Parse a decimal literal at full working precision.
    pub fn parse(s: &str) -> Option<Self> {
        let b = with_consts(|cc| BigFloat::parse(s, Radix::Dec, MP_BITS, RM, cc));
        if b.is_nan() {
            None
        } else {
            Some(Mp(b))
        }
    }

    fn ldexp(x: f64, e: i64) -> f64 {
        let mut v = x;
        let mut e = e;
        while e > 600 {
            v *= 2f64.powi(600);
            e -= 600;
        }
        while e < -600 {
            v *= 2f64.powi(-600);
            e += 600;
        }
        v * 2f64.powi(e as i32)
    }
}

impl fmt::Debug for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mp({:e})", self.to_f64())
    }
}

impl fmt::Display for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl PartialEq for Mp {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for Mp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $op:ident) => {
        impl $tr for Mp {
            type Output = Mp;
            fn $m(self, rhs: Mp) -> Mp {
                Mp(self.0.$op(&rhs.0, MP_BITS, RM))
            }
        }
        impl<'a> $tr<&'a Mp> for Mp {
            type Output = Mp;
            fn $m(self, rhs: &'a Mp) -> Mp {
                Mp(self.0.$op(&rhs.0, MP_BITS, RM))
            }
        }
        impl<'a, 'b> $tr<&'b Mp> for &'a Mp {
            type Output = Mp;
            fn $m(self, rhs: &'b Mp) -> Mp {
                Mp(self.0.$op(&rhs.0, MP_BITS, RM))
            }
        }
        impl $atr for Mp {
            fn $am(&mut self, rhs: Mp) {
                self.0 = self.0.$op(&rhs.0, MP_BITS, RM);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, add);
binop!(Sub, sub, SubAssign, sub_assign, sub);
binop!(Mul, mul, MulAssign, mul_assign, mul);
binop!(Div, div, DivAssign, div_assign, div);

impl Rem for Mp {
    type Output = Mp;
    fn rem(self, rhs: Mp) -> Mp {
        Mp(self.0.rem(&rhs.0))
    }
}

impl Neg for Mp {
    type Output = Mp;
    fn neg(self) -> Mp {
        Mp(self.0.neg())
    }
}

impl Zero for Mp {
    fn zero() -> Self {
        Mp(BigFloat::from_word(0, MP_BITS))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Mp {
    fn one() -> Self {
        Mp(BigFloat::from_word(1, MP_BITS))
    }
}

impl Num for Mp {
    type FromStrRadixErr = &'static str;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err("only decimal literals are supported");
        }
        Mp::parse(s).ok_or("malformed decimal literal")
    }
}

impl Real for Mp {
    const NAME: &'static str = "mp512";

    fn from_f64(x: f64) -> Self {
        if x.is_nan() {
            return Mp(BigFloat::nan(None));
        }
        Mp(BigFloat::from_f64(x, MP_BITS))
    }

    fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        match self.0.as_raw_parts() {
            Some((m, _, s, e, _)) => {
                let top = match m.last() {
                    Some(&w) if w != 0 => w,
                    _ => return 0.0,
                };
                let next = if m.len() > 1 { m[m.len() - 2] } else { 0 };
                let hi = top as f64 + (next >> 11) as f64 * 2f64.powi(-53);
                let v = Mp::ldexp(hi, e as i64 - 64);
                if s == Sign::Neg {
                    -v
                } else {
                    v
                }
            }
            None => f64::NAN,
        }
    }

    fn epsilon() -> Self {
        Mp(BigFloat::from_f64(2f64.powi(-(MP_BITS as i32 - 1)), MP_BITS))
    }

    fn pi() -> Self {
        Mp(with_consts(|cc| cc.pi(MP_BITS, RM)))
    }

    fn sqrt(&self) -> Self {
        Mp(self.0.sqrt(MP_BITS, RM))
    }

    fn exp(&self) -> Self {
        Mp(with_consts(|cc| self.0.exp(MP_BITS, RM, cc)))
    }

    fn ln(&self) -> Self {
        Mp(with_consts(|cc| self.0.ln(MP_BITS, RM, cc)))
    }

    fn sin(&self) -> Self {
        Mp(with_consts(|cc| self.0.sin(MP_BITS, RM, cc)))
    }

    fn cos(&self) -> Self {
        Mp(with_consts(|cc| self.0.cos(MP_BITS, RM, cc)))
    }

    fn atan(&self) -> Self {
        Mp(with_consts(|cc| self.0.atan(MP_BITS, RM, cc)))
    }

    fn is_finite(&self) -> bool {
        !(self.0.is_nan() || self.0.is_inf())
    }

    fn abs(&self) -> Self {
        Mp(self.0.abs())
    }

    fn is_negative(&self) -> bool {
        self.0.is_negative() && !self.0.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_doubles() {
        for &x in &[1.0, -2.5, 0.6, 1e-300, 3.0e250, -7.25e-12, 0.1] {
            assert_eq!(Mp::from_f64(x).to_f64(), x);
        }
        assert_eq!(Mp::zero().to_f64(), 0.0);
    }

    #[test]
    fn far_below_double_range() {
        let tiny = Mp::from_f64(1e-200).powi(3);
        assert_eq!(tiny.to_f64(), 0.0);
        let l = crate::num::ln_to_f64(&tiny);
        assert!((l - 3.0 * (1e-200f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn elementary_functions_at_full_precision() {
        let two = Mp::from_f64(2.0);
        let s = two.sqrt();
        let err = (s.clone() * &s - two).abs();
        assert!(err < Mp::from_f64(1e-150));
        let pi = Mp::pi();
        let four_atan = Mp::one().atan() * Mp::from_f64(4.0);
        assert!((pi.clone() - four_atan).abs() < Mp::from_f64(1e-150));
        let e = Mp::one().exp();
        assert!((e.ln() - Mp::one()).abs() < Mp::from_f64(1e-150));
        assert!(pi.sin().abs() < Mp::from_f64(1e-150));
        let lit = Mp::parse("0.1").unwrap();
        assert!((lit * Mp::from_f64(10.0) - Mp::one()).abs() < Mp::from_f64(1e-150));
    }

    #[test]
    fn atan2_quadrants() {
        for &(y, x) in &[(1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0), (0.3, 0.0), (0.0, -2.0)] {
            let a = Mp::from_f64(y).atan2(&Mp::from_f64(x)).to_f64();
            assert!((a - f64::atan2(y, x)).abs() < 1e-15, "{y} {x}");
        }
    }
}
