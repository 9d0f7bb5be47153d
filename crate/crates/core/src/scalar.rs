//! Exact elements of ℚ(√2).

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A rational kept in machine words while it fits, promoted to big
/// integers on overflow. Small values are always stored small.
#[derive(Clone)]
enum Rat {
    Small(i64, i64),
    Big(BigRational),
}

impl Rat {
    const ZERO: Rat = Rat::Small(0, 1);

    fn big(&self) -> BigRational {
        match self {
            Rat::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Rat::Big(b) => b.clone(),
        }
    }

    fn from_big(b: BigRational) -> Rat {
        match (b.numer().to_i64(), b.denom().to_i64()) {
            (Some(n), Some(d)) => Rat::Small(n, d),
            _ => Rat::Big(b),
        }
    }

    /// `n/d` in lowest terms with `d > 0`, or `None` on overflow.
    fn small(n: i128, d: i128) -> Option<Rat> {
        let g = n.gcd(&d);
        let (mut n, mut d) = if g > 1 { (n / g, d / g) } else { (n, d) };
        if d < 0 {
            n = -n;
            d = -d;
        }
        Some(Rat::Small(i64::try_from(n).ok()?, i64::try_from(d).ok()?))
    }

    fn is_zero(&self) -> bool {
        match self {
            Rat::Small(n, _) => *n == 0,
            Rat::Big(b) => b.is_zero(),
        }
    }

    fn is_negative(&self) -> bool {
        match self {
            Rat::Small(n, _) => *n < 0,
            Rat::Big(b) => b.is_negative(),
        }
    }

    fn add(&self, o: &Rat) -> Rat {
        if let (Rat::Small(a, b), Rat::Small(c, d)) = (self, o) {
            let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
            let r = if b == d { Rat::small(a + c, b) } else { Rat::small(a * d + c * b, b * d) };
            if let Some(r) = r {
                return r;
            }
        }
        Rat::from_big(self.big() + o.big())
    }

    fn mul(&self, o: &Rat) -> Rat {
        if let (Rat::Small(a, b), Rat::Small(c, d)) = (self, o) {
            if let Some(r) = Rat::small(*a as i128 * *c as i128, *b as i128 * *d as i128) {
                return r;
            }
        }
        Rat::from_big(self.big() * o.big())
    }

    fn neg(&self) -> Rat {
        match self {
            Rat::Small(n, d) if *n != i64::MIN => Rat::Small(-n, *d),
            _ => Rat::from_big(-self.big()),
        }
    }

    fn sub(&self, o: &Rat) -> Rat {
        self.add(&o.neg())
    }

    fn recip(&self) -> Rat {
        match self {
            Rat::Small(n, d) => Rat::small(*d as i128, *n as i128).expect("fits"),
            Rat::Big(b) => Rat::from_big(b.recip()),
        }
    }
}

impl PartialEq for Rat {
    fn eq(&self, o: &Rat) -> bool {
        match (self, o) {
            (Rat::Small(a, b), Rat::Small(c, d)) => a == c && b == d,
            // canonical form: a Big value never fits in Small
            (Rat::Big(x), Rat::Big(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for Rat {}

impl Hash for Rat {
    fn hash<H: Hasher>(&self, h: &mut H) {
        match self {
            Rat::Small(n, d) => {
                n.hash(h);
                d.hash(h);
            }
            Rat::Big(b) => b.hash(h),
        }
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, o: &Rat) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Rat {
    fn cmp(&self, o: &Rat) -> Ordering {
        match (self, o) {
            (Rat::Small(a, b), Rat::Small(c, d)) => Ratio::new_raw(*a as i128, *b as i128).cmp(&Ratio::new_raw(*c as i128, *d as i128)),
            _ => self.big().cmp(&o.big()),
        }
    }
}

impl Default for Rat {
    fn default() -> Rat {
        Rat::ZERO
    }
}

/// `rational + root2 * √2` with both parts exact.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    rational: Rat,
    root2: Rat,
}

impl Scalar {
    pub fn new(rational: BigRational, root2: BigRational) -> Self {
        Scalar { rational: Rat::from_big(rational), root2: Rat::from_big(root2) }
    }

    pub fn from_rational(q: BigRational) -> Self {
        Scalar { rational: Rat::from_big(q), root2: Rat::ZERO }
    }

    pub fn int(n: i64) -> Self {
        Scalar { rational: Rat::Small(n, 1), root2: Rat::ZERO }
    }

    pub fn frac(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Scalar { rational: Rat::small(p as i128, q as i128).expect("fits"), root2: Rat::ZERO }
    }

    /// `1/√2 = √2/2`.
    pub fn inv_sqrt2() -> Self {
        Scalar { rational: Rat::ZERO, root2: Rat::Small(1, 2) }
    }

    pub fn sqrt2() -> Self {
        Scalar { rational: Rat::ZERO, root2: Rat::Small(1, 1) }
    }

    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn rational_part(&self) -> BigRational {
        self.rational.big()
    }

    pub fn root2_part(&self) -> BigRational {
        self.root2.big()
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.root2.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.root2.is_zero()
    }

    /// The rational value, if the √2 part vanishes.
    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.rational.big())
    }

    /// Conjugate under √2 ↦ −√2.
    pub fn conj(&self) -> Self {
        Scalar { rational: self.rational.clone(), root2: self.root2.neg() }
    }

    /// Field norm `a² − 2b²`.
    pub fn norm(&self) -> BigRational {
        let (a, b) = (self.rational.big(), self.root2.big());
        &a * &a - BigRational::from_integer(2.into()) * &b * &b
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_rational() {
            return Ok(Scalar { rational: self.rational.recip(), root2: Rat::ZERO });
        }
        let n = Rat::from_big(self.norm()).recip();
        Ok(Scalar { rational: self.rational.mul(&n), root2: self.root2.mul(&n).neg() })
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn scale_int(&self, n: i64) -> Self {
        let q = Rat::Small(n, 1);
        Scalar { rational: self.rational.mul(&q), root2: self.root2.mul(&q) }
    }

    pub fn scale_rational(&self, q: &BigRational) -> Self {
        let q = Rat::from_big(q.clone());
        Scalar { rational: self.rational.mul(&q), root2: self.root2.mul(&q) }
    }
}

fn fmt_q(q: &Rat) -> String {
    match q {
        Rat::Small(n, d) => format!("{n}/{d}"),
        Rat::Big(b) => format!("{}/{}", b.numer(), b.denom()),
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.root2.is_zero() {
            return write!(f, "{}", fmt_q(&self.rational));
        }
        let sign = if self.root2.is_negative() { '-' } else { '+' };
        let abs = if self.root2.is_negative() { self.root2.neg() } else { self.root2.clone() };
        write!(f, "{}{}{}*sqrt2", fmt_q(&self.rational), sign, fmt_q(&abs))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_q(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Parses a bare rational such as `-3/2` or `4`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    parse_q(s)
}

impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some(body) = s.strip_suffix("*sqrt2") else {
            return Ok(Self::from_rational(parse_q(s)?));
        };
        // split at the sign separating the two parts (skip a leading sign)
        let cut = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .last()
            .map(|(i, _)| i)
            .ok_or_else(|| Error::Parse(format!("bad scalar `{s}`")))?;
        let (r, rest) = body.split_at(cut);
        let sign = if rest.starts_with('-') { -1 } else { 1 };
        let root2 = parse_q(&rest[1..])? * BigRational::from_integer(sign.into());
        Ok(Scalar::new(parse_q(r)?, root2))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<BigRational> for Scalar {
    fn from(q: BigRational) -> Self {
        Self::from_rational(q)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        Scalar { rational: self.rational.add(&o.rational), root2: self.root2.add(&o.root2) }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, o: Scalar) -> Scalar {
        &self + &o
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        Scalar { rational: self.rational.sub(&o.rational), root2: self.root2.sub(&o.root2) }
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, o: Scalar) -> Scalar {
        &self - &o
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        if self.root2.is_zero() && o.root2.is_zero() {
            return Scalar { rational: self.rational.mul(&o.rational), root2: Rat::ZERO };
        }
        let cross = self.root2.mul(&o.root2);
        Scalar {
            rational: self.rational.mul(&o.rational).add(&cross.add(&cross)),
            root2: self.rational.mul(&o.root2).add(&self.root2.mul(&o.rational)),
        }
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, o: Scalar) -> Scalar {
        &self * &o
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { rational: self.rational.neg(), root2: self.root2.neg() }
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, o: &Scalar) {
        self.rational = self.rational.add(&o.rational);
        if !o.root2.is_zero() {
            self.root2 = self.root2.add(&o.root2);
        }
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, o: &Scalar) {
        self.rational = self.rational.sub(&o.rational);
        if !o.root2.is_zero() {
            self.root2 = self.root2.sub(&o.root2);
        }
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, o: &Scalar) {
        *self = &*self * o;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_irrational() {
        let x: Scalar = "1/1+1/1*sqrt2".parse().unwrap();
        let y = x.inv().unwrap();
        assert_eq!(&x * &y, Scalar::one());
        assert_eq!(y.to_string(), "-1/1+1/1*sqrt2");
    }

    #[test]
    fn inv_sqrt2_squares_to_half() {
        let s = Scalar::inv_sqrt2();
        assert_eq!(&s * &s, Scalar::frac(1, 2));
    }

    #[test]
    fn overflow_promotes() {
        let big = Scalar::int(i64::MAX);
        let s = &big + &big;
        assert_eq!(s.rational_part(), BigRational::from_integer(BigInt::from(i64::MAX) * 2));
        let back = &s - &big;
        assert_eq!(back, big);
        let p = &Scalar::frac(1, i64::MAX) * &Scalar::frac(1, 3);
        assert_eq!(&p * &Scalar::int(3), Scalar::frac(1, i64::MAX));
    }

    #[test]
    fn parse_forms() {
        assert_eq!("-3/2".parse::<Scalar>().unwrap(), Scalar::frac(-3, 2));
        assert_eq!("7".parse::<Scalar>().unwrap(), Scalar::int(7));
        let z: Scalar = "-1/3-2/5*sqrt2".parse().unwrap();
        assert_eq!(z.to_string(), "-1/3-2/5*sqrt2");
        assert!("1/0".parse::<Scalar>().is_err());
        assert!(Scalar::zero().inv().is_err());
    }
}
