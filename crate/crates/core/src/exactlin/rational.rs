//! Exact rational scalars.
//!
//! Values are kept in lowest terms with a positive denominator. Small values
//! live in a pair of machine words and arithmetic is carried out in `i128`;
//! anything that does not fit falls back to arbitrary-precision integers.
//! The representation is canonical, so derived equality and hashing are exact.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::LinError;

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// numerator in (i64::MIN, i64::MAX], denominator in [1, i64::MAX]
    Small(i64, i64),
    Big(Box<(BigInt, BigInt)>),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Repr);

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn fits(v: i128) -> bool {
    v > i64::MIN as i128 && v <= i64::MAX as i128
}

impl Rational {
    pub fn zero() -> Self {
        Rational(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Rational(Repr::Small(1, 1))
    }

    pub fn from_int(n: i64) -> Self {
        if n == i64::MIN {
            return Self::from_big(BigInt::from(n), BigInt::one());
        }
        Rational(Repr::Small(n, 1))
    }

    /// `num / den`; panics on a zero denominator.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_i128(num as i128, den as i128)
    }

    fn from_i128(num: i128, den: i128) -> Self {
        debug_assert!(den != 0);
        let (mut n, mut d) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd_i128(n, d);
        if g > 1 {
            n /= g;
            d /= g;
        }
        if fits(n) && fits(d) {
            Rational(Repr::Small(n as i64, d as i64))
        } else {
            Rational(Repr::Big(Box::new((BigInt::from(n), BigInt::from(d)))))
        }
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let (mut n, mut d) = if den.is_negative() { (-num, -den) } else { (num, den) };
        let g = n.gcd(&d);
        if !g.is_one() && !g.is_zero() {
            n /= &g;
            d /= &g;
        }
        match (n.to_i64(), d.to_i64()) {
            (Some(a), Some(b)) if a != i64::MIN => Rational(Repr::Small(a, b)),
            _ => Rational(Repr::Big(Box::new((n, d)))),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(b) => b.0.clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(b) => b.1.clone(),
        }
    }

    fn parts_big(&self) -> (BigInt, BigInt) {
        (self.numer(), self.denom())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1, 1))
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.1.is_one(),
        }
    }

    pub fn signum(&self) -> i32 {
        match &self.0 {
            Repr::Small(n, _) => n.signum() as i32,
            Repr::Big(b) => match b.0.sign() {
                Sign::Minus => -1,
                Sign::NoSign => 0,
                Sign::Plus => 1,
            },
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(match &self.0 {
            Repr::Small(n, d) => Self::from_i128(*d as i128, *n as i128),
            Repr::Big(b) => Self::from_big(b.1.clone(), b.0.clone()),
        })
    }

    pub fn pow(&self, exp: i32) -> Self {
        if exp < 0 {
            return self.recip().expect("zero to a negative power").pow(-exp);
        }
        let mut base = self.clone();
        let mut e = exp as u32;
        let mut acc = Rational::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(b) => {
                let (n, d) = (&b.0, &b.1);
                let nb = n.bits() as i64;
                let db = d.bits() as i64;
                // shift both into the f64 range before dividing
                let shift = (nb.max(db) - 1000).max(0);
                let n2 = n >> shift as usize;
                let d2 = d >> shift as usize;
                match (n2.to_f64(), d2.to_f64()) {
                    (Some(x), Some(y)) if y != 0.0 => x / y,
                    _ => {
                        let e = nb - db;
                        let scaled = if e > 0 {
                            Rational::from_big(n.clone(), d << e as usize)
                        } else {
                            Rational::from_big(n << (-e) as usize, d.clone())
                        };
                        scaled.to_f64() * 2f64.powi(e as i32)
                    }
                }
            }
        }
    }

    /// Nearest-ish rational with the given denominator bound, via continued
    /// fractions. Used only to seed exact data from floating inputs.
    pub fn approximate_f64(x: f64, max_den: i64) -> Self {
        if !x.is_finite() {
            return Rational::zero();
        }
        let (mut h0, mut h1, mut k0, mut k1) = (0i128, 1i128, 1i128, 0i128);
        let mut v = x;
        for _ in 0..64 {
            let a = v.floor();
            if a.abs() > 1e18 {
                break;
            }
            let ai = a as i128;
            let h2 = ai * h1 + h0;
            let k2 = ai * k1 + k0;
            if k2 > max_den as i128 {
                break;
            }
            h0 = h1;
            h1 = h2;
            k0 = k1;
            k1 = k2;
            let frac = v - a;
            if frac.abs() < 1e-15 {
                break;
            }
            v = 1.0 / frac;
        }
        if k1 == 0 {
            return Rational::zero();
        }
        Rational::from_i128(h1, k1)
    }

    /// Always `"p/q"`, the wire format.
    pub fn to_pq_string(&self) -> String {
        match &self.0 {
            Repr::Small(n, d) => format!("{n}/{d}"),
            Repr::Big(b) => format!("{}/{}", b.0, b.1),
        }
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational::from_int(n as i64)
    }
}

impl From<usize> for Rational {
    fn from(n: usize) -> Self {
        Rational::from_i128(n as i128, 1)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_big(n, BigInt::one())
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) if b.1.is_one() => write!(f, "{}", b.0),
            Repr::Big(b) => write!(f, "{}/{}", b.0, b.1),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = LinError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LinError::Parse(format!("invalid rational {s:?}"));
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num: BigInt = n.parse().map_err(|_| bad())?;
        let den: BigInt = d.parse().map_err(|_| bad())?;
        if den.is_zero() || den.is_negative() {
            return Err(bad());
        }
        Ok(Rational::from_big(num, den))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_pq_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Int(n) => Ok(Rational::from_int(n)),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                ((*a as i128) * (*d as i128)).cmp(&((*c as i128) * (*b as i128)))
            }
            _ => {
                let (a, b) = self.parts_big();
                let (c, d) = other.parts_big();
                (a * d).cmp(&(c * b))
            }
        }
    }
}

fn add_impl(x: &Rational, y: &Rational) -> Rational {
    match (&x.0, &y.0) {
        (Repr::Small(0, _), _) => y.clone(),
        (_, Repr::Small(0, _)) => x.clone(),
        (Repr::Small(a, b), Repr::Small(c, d)) => {
            let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
            if b == d {
                return Rational::from_i128(a + c, b);
            }
            let g = gcd_i128(b, d);
            let num = a * (d / g) + c * (b / g);
            let den = b * (d / g);
            Rational::from_i128(num, den)
        }
        _ => {
            let (a, b) = x.parts_big();
            let (c, d) = y.parts_big();
            Rational::from_big(a * &d + c * &b, b * d)
        }
    }
}

fn mul_impl(x: &Rational, y: &Rational) -> Rational {
    match (&x.0, &y.0) {
        (Repr::Small(0, _), _) | (_, Repr::Small(0, _)) => Rational::zero(),
        (Repr::Small(a, b), Repr::Small(c, d)) => {
            let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
            let g1 = gcd_i128(a, d);
            let g2 = gcd_i128(c, b);
            let num = (a / g1) * (c / g2);
            let den = (b / g2) * (d / g1);
            if fits(num) && fits(den) {
                Rational(Repr::Small(num as i64, den as i64))
            } else {
                Rational::from_i128(num, den)
            }
        }
        _ => {
            let (a, b) = x.parts_big();
            let (c, d) = y.parts_big();
            Rational::from_big(a * c, b * d)
        }
    }
}

fn neg_impl(x: &Rational) -> Rational {
    match &x.0 {
        Repr::Small(n, d) => Rational(Repr::Small(-n, *d)),
        Repr::Big(b) => Rational::from_big(-b.0.clone(), b.1.clone()),
    }
}

fn div_impl(x: &Rational, y: &Rational) -> Rational {
    mul_impl(x, &y.recip().expect("division by zero rational"))
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                $f(self, rhs)
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                $f(&self, &rhs)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                $f(&self, rhs)
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                $f(self, &rhs)
            }
        }
    };
}

fn sub_impl(x: &Rational, y: &Rational) -> Rational {
    add_impl(x, &neg_impl(y))
}

binop!(Add, add, add_impl);
binop!(Sub, sub, sub_impl);
binop!(Mul, mul, mul_impl);
binop!(Div, div, div_impl);

macro_rules! assignop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&Rational> for Rational {
            fn $m(&mut self, rhs: &Rational) {
                *self = $f(self, rhs);
            }
        }
        impl $tr<Rational> for Rational {
            fn $m(&mut self, rhs: Rational) {
                *self = $f(self, &rhs);
            }
        }
    };
}

assignop!(AddAssign, add_assign, add_impl);
assignop!(SubAssign, sub_assign, sub_impl);
assignop!(MulAssign, mul_assign, mul_impl);
assignop!(DivAssign, div_assign, div_impl);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        neg_impl(&self)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        neg_impl(self)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |a, b| a * b)
    }
}

/// Shorthand for `Rational::new`.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

/// Shorthand for an integer rational.
pub fn qi(n: i64) -> Rational {
    Rational::from_int(n)
}
