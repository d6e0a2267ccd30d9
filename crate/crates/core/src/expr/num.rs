//! Exact-when-possible scalar constants.
//!
//! Every constant that enters an expression tree is a [`Num`]. Rational
//! arithmetic is exact over `i128`; on overflow, or when a real that is not
//! a short rational is supplied, the value degrades to an `f64`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

pub type Rational = Ratio<i128>;

#[derive(Clone, Copy, Debug)]
pub enum Num {
    Rat(Rational),
    Real(f64),
}

impl Num {
    pub const ZERO: Num = Num::Rat(Ratio::new_raw(0, 1));
    pub const ONE: Num = Num::Rat(Ratio::new_raw(1, 1));

    pub fn int(v: i64) -> Num {
        Num::Rat(Rational::from_integer(v as i128))
    }

    /// `p/q` in lowest terms. Panics if `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Num {
        Num::Rat(Rational::new(p as i128, q as i128))
    }

    pub fn real(v: f64) -> Num {
        Num::Real(v)
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Num::Rat(r) => r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN),
            Num::Real(v) => v,
        }
    }

    pub fn as_rational(self) -> Option<Rational> {
        match self {
            Num::Rat(r) => Some(r),
            Num::Real(_) => None,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Num::Rat(_))
    }

    pub fn is_zero(self) -> bool {
        match self {
            Num::Rat(r) => r.is_zero(),
            Num::Real(v) => v == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Num::Rat(r) => r.is_one(),
            Num::Real(v) => v == 1.0,
        }
    }

    pub fn is_minus_one(self) -> bool {
        match self {
            Num::Rat(r) => r == -Rational::one(),
            Num::Real(v) => v == -1.0,
        }
    }

    pub fn is_negative(self) -> bool {
        match self {
            Num::Rat(r) => r.is_negative(),
            Num::Real(v) => v < 0.0,
        }
    }

    /// The integer value, if this is an exact integer that fits in `i32`.
    pub fn as_i32(self) -> Option<i32> {
        match self {
            Num::Rat(r) if r.is_integer() => i32::try_from(r.to_integer()).ok(),
            _ => None,
        }
    }

    pub fn abs(self) -> Num {
        match self {
            Num::Rat(r) => Num::Rat(r.abs()),
            Num::Real(v) => Num::Real(v.abs()),
        }
    }

    /// Integer power. Returns `None` for `0^k` with `k < 0`.
    pub fn powi(self, k: i32) -> Option<Num> {
        if k < 0 {
            if self.is_zero() {
                return None;
            }
            return Num::ONE.checked_div(self.powi(-k)?);
        }
        let mut acc = Num::ONE;
        for _ in 0..k {
            acc = acc * self;
        }
        Some(acc)
    }

    /// Division, `None` when dividing by an exact zero.
    pub fn checked_div(self, rhs: Num) -> Option<Num> {
        match (self, rhs) {
            (_, Num::Rat(b)) if b.is_zero() => None,
            (Num::Rat(a), Num::Rat(b)) => Some(a.checked_div(&b).map_or_else(|| Num::Real(self.to_f64() / rhs.to_f64()), Num::Rat)),
            _ => Some(Num::Real(self.to_f64() / rhs.to_f64())),
        }
    }

    /// Equality that is exact for two rationals and within `tol` otherwise.
    pub fn approx_eq(self, other: Num, tol: f64) -> bool {
        match (self, other) {
            (Num::Rat(a), Num::Rat(b)) => a == b,
            _ => (self.to_f64() - other.to_f64()).abs() <= tol,
        }
    }
}

impl From<i64> for Num {
    fn from(v: i64) -> Self {
        Num::int(v)
    }
}

impl From<Rational> for Num {
    fn from(v: Rational) -> Self {
        Num::Rat(v)
    }
}

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Num::Rat(a), Num::Rat(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Num::Rat(a), Num::Rat(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

macro_rules! checked_binop {
    ($trait:ident, $method:ident, $checked:ident, $op:tt) => {
        impl $trait for Num {
            type Output = Num;
            fn $method(self, rhs: Num) -> Num {
                match (self, rhs) {
                    (Num::Rat(a), Num::Rat(b)) => a
                        .$checked(&b)
                        .map_or_else(|| Num::Real(self.to_f64() $op rhs.to_f64()), Num::Rat),
                    _ => Num::Real(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
    };
}

checked_binop!(Add, add, checked_add, +);
checked_binop!(Sub, sub, checked_sub, -);
checked_binop!(Mul, mul, checked_mul, *);

impl Div for Num {
    type Output = Num;
    /// Panics on exact division by zero; use [`Num::checked_div`] when the
    /// divisor is not known to be nonzero.
    fn div(self, rhs: Num) -> Num {
        self.checked_div(rhs).expect("division of Num by exact zero")
    }
}

impl Neg for Num {
    type Output = Num;
    fn neg(self) -> Num {
        match self {
            Num::Rat(r) => Num::Rat(-r),
            Num::Real(v) => Num::Real(-v),
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Rat(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Num::Rat(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Num::Real(v) => write!(f, "{v}"),
        }
    }
}
