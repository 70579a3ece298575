//! Exact dyadic and decimal-sourced rational arithmetic.
//!
//! Every probability attached to a tribes function is a dyadic rational
//! `m / 2^e`, so [`Dyadic`] carries expectations, influences and tribe
//! failure products without rounding. Budgets and target expectations come
//! in as decimal strings and are held as [`Rational`]. The two meet in
//! [`compare`], which decides orderings by integer cross-multiplication.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Result, TribesError};

/// Largest decimal exponent accepted by [`Rational::parse_decimal`].
const MAX_DECIMAL_EXPONENT: i64 = 4096;

/// A value `mantissa / 2^exponent` with an arbitrary-precision mantissa.
///
/// Values are kept normalized: the mantissa is odd, or the exponent is 0
/// (which covers zero as `0 / 2^0`). Structural equality therefore agrees
/// with numeric equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: u64,
}

impl Dyadic {
    /// Builds `mantissa / 2^exponent` and normalizes it.
    pub fn new(mantissa: impl Into<BigInt>, exponent: u64) -> Self {
        let mut d = Dyadic {
            mantissa: mantissa.into(),
            exponent,
        };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            mantissa: BigInt::one(),
            exponent: 0,
        }
    }

    /// Exactly `2^-k` for `k >= 1`.
    pub fn pow2_neg(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(TribesError::InvalidArgument(
                "pow2_neg needs k >= 1".to_string(),
            ));
        }
        Ok(Dyadic {
            mantissa: BigInt::one(),
            exponent: k,
        })
    }

    /// Exactly `1 - self`, defined for values in `[0, 1]`.
    pub fn one_minus(&self) -> Result<Self> {
        if self.is_negative() || *self > Dyadic::one() {
            return Err(TribesError::InvalidArgument(format!(
                "one_minus needs a value in [0, 1], got {self}"
            )));
        }
        Ok(&Dyadic::one() - self)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    /// Nearest double (up to a final rounding of the scaled mantissa).
    pub fn to_f64(&self) -> f64 {
        if self.mantissa.is_zero() {
            return 0.0;
        }
        let mut mantissa = self.mantissa.clone();
        let mut exponent = self.exponent as i64;
        let bits = mantissa.bits();
        if bits > 64 {
            let shift = bits - 64;
            mantissa >>= shift;
            exponent -= shift as i64;
        }
        let m = mantissa.to_f64().unwrap_or(f64::NAN);
        scale_pow2(m, -exponent)
    }

    fn normalize(&mut self) {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return;
        }
        let tz = self.mantissa.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exponent);
        if shift > 0 {
            self.mantissa >>= shift;
            self.exponent -= shift;
        }
    }

    /// Both mantissas rescaled to the common exponent `max(a.e, b.e)`.
    fn aligned(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, u64) {
        let e = a.exponent.max(b.exponent);
        (
            &a.mantissa << (e - a.exponent),
            &b.mantissa << (e - b.exponent),
            e,
        )
    }
}

fn scale_pow2(mut x: f64, mut e: i64) -> f64 {
    // powi saturates past about 2^1023, so scale in steps.
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.mantissa)
        } else {
            write!(f, "{}/2^{}", self.mantissa, self.exponent)
        }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = Dyadic::aligned(self, other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = Dyadic::aligned(self, rhs);
        Dyadic::new(a + b, e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = Dyadic::aligned(self, rhs);
        Dyadic::new(a - b, e)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $method:ident, $ty:ty) => {
        impl $tr for $ty {
            type Output = $ty;
            fn $method(self, rhs: $ty) -> $ty {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add, Dyadic);
forward_owned_binop!(Sub, sub, Dyadic);
forward_owned_binop!(Mul, mul, Dyadic);

/// An exact rational number in lowest terms with a positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(TribesError::InvalidArgument(
                "rational with zero denominator".to_string(),
            ));
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// Parses a finite decimal literal such as `0.25`, `-3`, `.5` or
    /// `1.5e-3` into its exact rational value.
    pub fn parse_decimal(input: &str) -> Result<Self> {
        let err = |reason: &str| TribesError::Parse {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let s = input.trim();
        let (negative, s) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let (body, exp) = match s.find(['e', 'E']) {
            Some(pos) => {
                let exp: i64 = s[pos + 1..]
                    .parse()
                    .map_err(|_| err("malformed exponent"))?;
                (&s[..pos], exp)
            }
            None => (s, 0),
        };
        if exp.abs() > MAX_DECIMAL_EXPONENT {
            return Err(err("exponent out of range"));
        }
        let (int_part, frac_part) = match body.find('.') {
            Some(pos) => (&body[..pos], &body[pos + 1..]),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err("no digits"));
        }
        if !int_part
            .bytes()
            .chain(frac_part.bytes())
            .all(|b| b.is_ascii_digit())
        {
            return Err(err("unexpected character"));
        }
        let digits = format!("{int_part}{frac_part}");
        let mut numer: BigInt = digits.parse().map_err(|_| err("no digits"))?;
        if negative {
            numer = -numer;
        }
        let scale = exp - frac_part.len() as i64;
        let ten = BigInt::from(10u32);
        let value = if scale >= 0 {
            BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
        };
        Ok(Rational(value))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
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

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Finite decimal expansion without trailing zeros, or `None` when the
    /// denominator has a prime factor other than 2 and 5.
    pub fn to_decimal_string(&self) -> Option<String> {
        let mut den = self.denom().clone();
        let two = BigInt::from(2u32);
        let five = BigInt::from(5u32);
        let (mut twos, mut fives) = (0usize, 0usize);
        while den.is_even() {
            den /= &two;
            twos += 1;
        }
        while (&den % &five).is_zero() {
            den /= &five;
            fives += 1;
        }
        if !den.is_one() {
            return None;
        }
        let places = twos.max(fives);
        let scaled: BigInt =
            self.numer() * num_traits::pow(BigInt::from(10u32), places) / self.denom();
        let sign = if scaled.sign() == Sign::Minus { "-" } else { "" };
        let digits = scaled.abs().to_string();
        if places == 0 {
            return Some(format!("{sign}{digits}"));
        }
        let padded = format!("{digits:0>width$}", width = places + 1);
        let (int_part, frac_part) = padded.split_at(padded.len() - places);
        let frac_part = frac_part.trim_end_matches('0');
        if frac_part.is_empty() {
            Some(format!("{sign}{int_part}"))
        } else {
            Some(format!("{sign}{int_part}.{frac_part}"))
        }
    }
}

impl FromStr for Rational {
    type Err = TribesError;
    fn from_str(s: &str) -> Result<Self> {
        Rational::parse_decimal(s)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&Dyadic> for Rational {
    fn from(d: &Dyadic) -> Self {
        let den = BigInt::one() << d.exponent;
        Rational(BigRational::new(d.mantissa.clone(), den))
    }
}

impl Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        Rational(&self.0 + &rhs.0)
    }
}

impl Sub for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        Rational(&self.0 - &rhs.0)
    }
}

impl Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        Rational(&self.0 * &rhs.0)
    }
}

forward_owned_binop!(Add, add, Rational);
forward_owned_binop!(Sub, sub, Rational);
forward_owned_binop!(Mul, mul, Rational);

/// Anything that can be written as `numerator / denominator` with a
/// positive denominator.
pub trait ExactValue {
    fn fraction(&self) -> (BigInt, BigInt);
}

impl ExactValue for Dyadic {
    fn fraction(&self) -> (BigInt, BigInt) {
        (self.mantissa.clone(), BigInt::one() << self.exponent)
    }
}

impl ExactValue for Rational {
    fn fraction(&self) -> (BigInt, BigInt) {
        (self.numer().clone(), self.denom().clone())
    }
}

/// Exact ordering of two values by cross-multiplication.
pub fn compare(a: &impl ExactValue, b: &impl ExactValue) -> Ordering {
    let (an, ad) = a.fraction();
    let (bn, bd) = b.fraction();
    (an * bd).cmp(&(bn * ad))
}
