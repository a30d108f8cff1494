//! Exact rationals and the extended line `ℚ ∪ {−∞, +∞}`.
//!
//! Every arithmetic operation on [`Rational`] is counted in a thread-local
//! tally together with the largest operand bit-size seen. The tally is what
//! the complexity checks read; it costs one `Cell` update per operation.

use std::cell::Cell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

thread_local! {
    static OPS: Cell<u64> = const { Cell::new(0) };
    static MAX_BITS: Cell<u64> = const { Cell::new(0) };
}

/// Snapshot of the arithmetic tally for the current thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpStats {
    /// Number of additions, subtractions, multiplications, divisions and negations.
    pub ops: u64,
    /// Largest `bits(numerator) + bits(denominator)` of any operation result.
    pub max_bits: u64,
}

/// Resets the tally and returns what it held.
pub fn reset_stats() -> OpStats {
    let s = stats();
    OPS.with(|c| c.set(0));
    MAX_BITS.with(|c| c.set(0));
    s
}

pub fn stats() -> OpStats {
    OpStats {
        ops: OPS.with(Cell::get),
        max_bits: MAX_BITS.with(Cell::get),
    }
}

#[inline]
fn record(r: &BigRational) {
    OPS.with(|c| c.set(c.get() + 1));
    let bits = r.numer().bits() + r.denom().bits();
    MAX_BITS.with(|c| {
        if bits > c.get() {
            c.set(bits)
        }
    });
}

/// An exact rational number, always in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        Rational(BigRational::new(numer, denom))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn signum(&self) -> i32 {
        if self.0.is_positive() {
            1
        } else if self.0.is_negative() {
            -1
        } else {
            0
        }
    }

    pub fn abs(&self) -> Rational {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Rational {
        Rational::one() / self
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Bit length of the numerator plus bit length of the denominator.
    pub fn bit_size(&self) -> u64 {
        self.0.numer().bits() + self.0.denom().bits()
    }

    /// `(self + other) / 2`.
    pub fn midpoint(&self, other: &Rational) -> Rational {
        (self + other) / &Rational::from_integer(2)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                let r = &self.0 $op &rhs.0;
                record(&r);
                Rational(r)
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        let r = &self.0 / &rhs.0;
        record(&r);
        Rational(r)
    }
}
impl Div<Rational> for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        &self / &rhs
    }
}
impl<'a> Div<&'a Rational> for Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        &self / rhs
    }
}
impl Div<Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        self / &rhs
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        let r = -&self.0;
        record(&r);
        Rational(r)
    }
}
impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl fmt::Display for Rational {
    /// Integers print as `n`, everything else as `p/q`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `n`, `-n`, `p/q` and `-p/q` with decimal digits.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let valid = |t: &str, signed: bool| {
            let digits = if signed {
                t.strip_prefix('-').unwrap_or(t)
            } else {
                t
            };
            !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        };
        if !valid(num, true) || !valid(den, false) {
            return Err(err());
        }
        let n: BigInt = num.parse().map_err(|_| err())?;
        let d: BigInt = den.parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        Ok(Rational(BigRational::new(n, d)))
    }
}

/// A rational or one of the two infinities. Ordered `−∞ < q < +∞`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum ExtendedRational {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl ExtendedRational {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtendedRational::Finite(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedRational::Finite(_))
    }

    pub fn negated(&self) -> ExtendedRational {
        match self {
            ExtendedRational::NegInf => ExtendedRational::PosInf,
            ExtendedRational::PosInf => ExtendedRational::NegInf,
            ExtendedRational::Finite(q) => ExtendedRational::Finite(-q),
        }
    }

    /// Multiplies by a nonzero rational; a negative factor swaps the infinities.
    pub fn scaled(&self, factor: &Rational) -> ExtendedRational {
        assert!(!factor.is_zero());
        match self {
            ExtendedRational::Finite(q) => ExtendedRational::Finite(q * factor),
            inf if factor.is_positive() => inf.clone(),
            inf => inf.negated(),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            ExtendedRational::NegInf => 0,
            ExtendedRational::Finite(_) => 1,
            ExtendedRational::PosInf => 2,
        }
    }
}

impl From<Rational> for ExtendedRational {
    fn from(q: Rational) -> Self {
        ExtendedRational::Finite(q)
    }
}

impl PartialOrd for ExtendedRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtendedRational::Finite(a), ExtendedRational::Finite(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for ExtendedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedRational::NegInf => f.write_str("-inf"),
            ExtendedRational::PosInf => f.write_str("inf"),
            ExtendedRational::Finite(q) => write!(f, "{q}"),
        }
    }
}

impl fmt::Debug for ExtendedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ExtendedRational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "+inf" => Ok(ExtendedRational::PosInf),
            "-inf" => Ok(ExtendedRational::NegInf),
            t => t.parse().map(ExtendedRational::Finite),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_positive_denominator() {
        let q = Rational::new(6, -4);
        assert_eq!(q.numer(), &BigInt::from(-3));
        assert_eq!(q.denom(), &BigInt::from(2));
        assert_eq!(q.to_string(), "-3/2");
    }

    #[test]
    fn parse_and_display() {
        for s in ["0", "-7", "5/2", "-2/3"] {
            let q: Rational = s.parse().unwrap();
            assert_eq!(q.to_string(), s);
        }
        assert_eq!("4/2".parse::<Rational>().unwrap().to_string(), "2");
        assert!("1/0".parse::<Rational>().is_err());
        assert!("1.5".parse::<Rational>().is_err());
        assert!("--1".parse::<Rational>().is_err());
        assert!("1/-2".parse::<Rational>().is_err());
    }

    #[test]
    fn extended_order() {
        let a = ExtendedRational::Finite(Rational::from(-1000));
        assert!(ExtendedRational::NegInf < a);
        assert!(a < ExtendedRational::PosInf);
        assert_eq!(
            ExtendedRational::PosInf.scaled(&Rational::from(-2)),
            ExtendedRational::NegInf
        );
        assert_eq!("-inf".parse::<ExtendedRational>().unwrap(), ExtendedRational::NegInf);
    }

    #[test]
    fn counting() {
        reset_stats();
        let a = Rational::new(1, 3);
        let b = Rational::new(1, 6);
        let _ = &a + &b;
        let _ = &a * &b;
        let s = stats();
        assert_eq!(s.ops, 2);
        assert!(s.max_bits >= 2);
    }
}
