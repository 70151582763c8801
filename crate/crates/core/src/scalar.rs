//! Exact scalars: the rationals and prime fields.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("characteristic {0} is neither 0 nor a prime")]
    BadCharacteristic(u64),
    #[error("cannot parse scalar `{0}`")]
    Parse(String),
    #[error("denominator of `{0}` vanishes in the field")]
    Denominator(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Field {
    Rational,
    Prime(u64),
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn reduce_mod(n: &BigInt, p: u64) -> u64 {
    let m = BigInt::from(p);
    let r = ((n % &m) + &m) % &m;
    r.to_u64().unwrap()
}

fn pow_mod(b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u128;
    let mut base = (b % p) as u128;
    let p128 = p as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p128;
        }
        base = base * base % p128;
        e >>= 1;
    }
    acc as u64
}

impl Field {
    pub fn from_characteristic(c: u64) -> Result<Field, ScalarError> {
        match c {
            0 => Ok(Field::Rational),
            p if is_prime(p) => Ok(Field::Prime(p)),
            other => Err(ScalarError::BadCharacteristic(other)),
        }
    }

    pub fn characteristic(self) -> u64 {
        match self {
            Field::Rational => 0,
            Field::Prime(p) => p,
        }
    }

    pub fn zero(self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(self, n: i64) -> Scalar {
        self.from_bigint(&BigInt::from(n))
    }

    pub fn from_bigint(self, n: &BigInt) -> Scalar {
        match self {
            Field::Rational => Scalar::Rational(BigRational::from_integer(n.clone())),
            Field::Prime(p) => Scalar::Modular { value: reduce_mod(n, p), modulus: p },
        }
    }

    /// Maps a rational number into the field; fails when the denominator is divisible by p.
    pub fn from_rational(self, q: &BigRational) -> Result<Scalar, ScalarError> {
        match self {
            Field::Rational => Ok(Scalar::Rational(q.clone())),
            Field::Prime(p) => {
                let num = reduce_mod(q.numer(), p);
                let den = reduce_mod(q.denom(), p);
                if den == 0 {
                    return Err(ScalarError::Denominator(q.to_string()));
                }
                let inv = pow_mod(den, p - 2, p);
                Ok(Scalar::Modular { value: ((num as u128 * inv as u128) % p as u128) as u64, modulus: p })
            }
        }
    }

    /// Parses `3`, `-2`, `1/2` or `-7/3`.
    pub fn parse(self, text: &str) -> Result<Scalar, ScalarError> {
        let t = text.trim();
        let bad = || ScalarError::Parse(text.to_string());
        let (num, den) = match t.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (t, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(ScalarError::Denominator(text.to_string()));
        }
        self.from_rational(&BigRational::new(num, den))
    }

    /// All nonzero elements, for prime fields only.
    pub fn nonzero_elements(self) -> Option<Vec<Scalar>> {
        match self {
            Field::Rational => None,
            Field::Prime(p) => Some((1..p).map(|v| Scalar::Modular { value: v, modulus: p }).collect()),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Prime(p) => write!(f, "F{p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(BigRational),
    Modular { value: u64, modulus: u64 },
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Rational(_) => Field::Rational,
            Scalar::Modular { modulus, .. } => Field::Prime(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_zero(),
            Scalar::Modular { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_one(),
            Scalar::Modular { value, .. } => *value == 1,
        }
    }

    pub fn inverse(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Scalar::Rational(q) => Scalar::Rational(q.recip()),
            Scalar::Modular { value, modulus } => {
                Scalar::Modular { value: pow_mod(*value, modulus - 2, *modulus), modulus: *modulus }
            }
        })
    }

    /// Whether the printed form needs a leading minus sign.
    pub fn is_negative_literal(&self) -> bool {
        matches!(self, Scalar::Rational(q) if q.is_negative())
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(q) => Some(q),
            _ => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) => {
                if q.is_integer() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
            Scalar::Modular { value, .. } => write!(f, "{value}"),
        }
    }
}

fn same_modulus(a: u64, b: u64) -> u64 {
    assert_eq!(a, b, "scalars from different prime fields");
    a
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (Scalar::Modular { value: a, modulus: p }, Scalar::Modular { value: b, modulus: q }) => {
                let p = same_modulus(*p, *q);
                Scalar::Modular { value: ((*a as u128 + *b as u128) % p as u128) as u64, modulus: p }
            }
            _ => panic!("scalars from different fields"),
        }
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Modular { value: a, modulus: p }, Scalar::Modular { value: b, modulus: q }) => {
                let p = same_modulus(*p, *q);
                Scalar::Modular { value: ((*a as u128 * *b as u128) % p as u128) as u64, modulus: p }
            }
            _ => panic!("scalars from different fields"),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(-a),
            Scalar::Modular { value, modulus } => {
                Scalar::Modular { value: (modulus - value) % modulus, modulus: *modulus }
            }
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        self * &rhs.inverse().expect("division by zero scalar")
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar { (&self).$m(&rhs) }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar { (&self).$m(rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_inverse_and_parse() {
        let f = Field::Prime(7);
        let half = f.parse("1/2").unwrap();
        assert_eq!(&half * &f.from_i64(2), f.one());
        assert_eq!(f.parse("-1").unwrap(), f.from_i64(6));
        assert!(Field::Prime(2).parse("1/2").is_err());
    }

    #[test]
    fn rational_display() {
        let f = Field::Rational;
        assert_eq!(f.parse("-6/4").unwrap().to_string(), "-3/2");
        assert_eq!(f.parse("4").unwrap().to_string(), "4");
    }

    #[test]
    fn characteristic_checks() {
        assert!(Field::from_characteristic(4).is_err());
        assert_eq!(Field::from_characteristic(0).unwrap(), Field::Rational);
        assert_eq!(Field::from_characteristic(3).unwrap(), Field::Prime(3));
    }
}
