//! The rank-four lattice on (α, β, δ, φ) with Gram diag(1, −1, 1, −1).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lattice coordinates. Exponents that occur in finite-weight computations
/// have tiny numerators and denominators, so machine-word rationals suffice.
pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

/// Index of a Heisenberg species in the canonical basis order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Species {
    Alpha = 0,
    Beta = 1,
    Delta = 2,
    Phi = 3,
}

impl Species {
    pub const ALL: [Species; 4] = [Species::Alpha, Species::Beta, Species::Delta, Species::Phi];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Species {
        Self::ALL[i]
    }

    /// Diagonal Gram entry ⟨b, b⟩.
    pub fn gram(self) -> i64 {
        GRAM[self as usize]
    }

    pub fn name(self) -> &'static str {
        ["alpha", "beta", "delta", "phi"][self as usize]
    }

    pub fn symbol(self) -> &'static str {
        ["α", "β", "δ", "φ"][self as usize]
    }
}

pub const GRAM: [i64; 4] = [1, -1, 1, -1];

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LatticeVector(pub [Q; 4]);

impl LatticeVector {
    pub const ZERO: LatticeVector = LatticeVector([Q::new_raw(0, 1); 4]);

    pub fn new(a: Q, b: Q, d: Q, p: Q) -> Self {
        LatticeVector([a, b, d, p])
    }

    pub fn ints(a: i64, b: i64, d: i64, p: i64) -> Self {
        LatticeVector([qi(a), qi(b), qi(d), qi(p)])
    }

    pub fn basis(s: Species) -> Self {
        let mut v = Self::ZERO;
        v.0[s.index()] = Q::one();
        v
    }

    pub fn alpha() -> Self {
        Self::basis(Species::Alpha)
    }
    pub fn beta() -> Self {
        Self::basis(Species::Beta)
    }
    pub fn delta() -> Self {
        Self::basis(Species::Delta)
    }
    pub fn phi() -> Self {
        Self::basis(Species::Phi)
    }

    pub fn coord(&self, s: Species) -> Q {
        self.0[s.index()]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|c| c.is_integer())
    }

    /// Coordinatewise floor; used to extend the cocycle to shifted cosets.
    pub fn floor(&self) -> [i64; 4] {
        self.0.map(|c| c.floor().to_integer())
    }

    pub fn integral_coords(&self) -> Result<[i64; 4]> {
        if !self.is_integral() {
            return Err(Error::NonIntegral(self.to_string()));
        }
        Ok(self.0.map(|c| c.to_integer()))
    }

    pub fn scale(&self, k: Q) -> Self {
        LatticeVector(self.0.map(|c| c * k))
    }
}

/// Symmetric bilinear form with the diagonal Gram matrix.
pub fn pairing(u: &LatticeVector, v: &LatticeVector) -> Q {
    let mut s = Q::zero();
    for i in 0..4 {
        if !u.0[i].is_zero() && !v.0[i].is_zero() {
            s += u.0[i] * v.0[i] * GRAM[i];
        }
    }
    s
}

fn cocycle_sign(u: [i64; 4], v: [i64; 4]) -> i64 {
    // ε(b_i, b_j) = −1 for i > j, ε(b, b) = (−1)^{⟨b,b⟩(⟨b,b⟩−1)/2}
    let mut e = 0i64;
    for i in 0..4 {
        for j in 0..i {
            e += u[i] * v[j];
        }
        if GRAM[i] < 0 {
            e += u[i] * v[i];
        }
    }
    if e.is_even() {
        1
    } else {
        -1
    }
}

/// The bimultiplicative 2-cocycle on integral vectors: ε(bᵢ, bⱼ) = 1 for
/// i < j, −1 for i > j, and ε(b, b) = −1 exactly on the negative-norm
/// generators β and φ. The diagonal choice makes ε(γ, γ) = 1 for the
/// isotropic γ = α + β, which is what e₍₀₎f = h requires.
pub fn cocycle(u: &LatticeVector, v: &LatticeVector) -> Result<Scalar> {
    Ok(Scalar::int(cocycle_sign(u.integral_coords()?, v.integral_coords()?)))
}

/// Cocycle on arbitrary rational vectors, computed on coordinatewise floors.
/// On integral inputs it agrees with [`cocycle`]; for an integral first
/// argument it makes every shifted coset `μ + L` a module, and it reproduces
/// the super-commutation sign for the fractional screening exponents used
/// here, whose fractional parts are isotropic and orthogonal to the lattice
/// they act on.
pub fn cocycle_floor(u: &LatticeVector, v: &LatticeVector) -> i64 {
    cocycle_sign(u.floor(), v.floor())
}

/// Weight vector ρ = ½(−α + β − 2δ): the conformal vector is
/// ω = ½Σ b(−1)b*(−1) + ρ(−2), so L(0)e^μ = (½⟨μ,μ⟩ − ⟨ρ,μ⟩)e^μ.
pub fn rho() -> LatticeVector {
    LatticeVector::new(q(-1, 2), q(1, 2), qi(-1), qi(0))
}

/// Conformal weight of the exponential e^μ.
pub fn exp_weight(mu: &LatticeVector) -> Q {
    pairing(mu, mu) / 2 - pairing(&rho(), mu)
}

/// The vector −2β + δ whose zero mode is h(0).
pub fn h_vector() -> LatticeVector {
    LatticeVector::ints(0, -2, 1, 0)
}

/// Charge triple (h₀, δ₀, φ₀) of e^μ.
pub fn exp_charge(mu: &LatticeVector) -> Charge {
    Charge {
        h0: pairing(&h_vector(), mu),
        delta0: pairing(&LatticeVector::delta(), mu),
        phi0: pairing(&LatticeVector::phi(), mu),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Charge {
    #[serde(with = "qserde")]
    pub h0: Q,
    #[serde(with = "qserde")]
    pub delta0: Q,
    #[serde(with = "qserde")]
    pub phi0: Q,
}

/// Serde helpers writing a machine rational as `"p/q"`.
pub mod qserde {
    use super::{parse_q, Q};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", x.numer(), x.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

impl Charge {
    pub fn new(h0: Q, delta0: Q, phi0: Q) -> Self {
        Charge { h0, delta0, phi0 }
    }
}

impl Add for Charge {
    type Output = Charge;
    fn add(self, o: Charge) -> Charge {
        Charge { h0: self.h0 + o.h0, delta0: self.delta0 + o.delta0, phi0: self.phi0 + o.phi0 }
    }
}

impl fmt::Display for Charge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.h0, self.delta0, self.phi0)
    }
}

impl Add for LatticeVector {
    type Output = LatticeVector;
    fn add(self, o: LatticeVector) -> LatticeVector {
        LatticeVector([0, 1, 2, 3].map(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for LatticeVector {
    type Output = LatticeVector;
    fn sub(self, o: LatticeVector) -> LatticeVector {
        LatticeVector([0, 1, 2, 3].map(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> LatticeVector {
        LatticeVector(self.0.map(|c| -c))
    }
}

impl Mul<LatticeVector> for Q {
    type Output = LatticeVector;
    fn mul(self, v: LatticeVector) -> LatticeVector {
        v.scale(self)
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for s in Species::ALL {
            let c = self.coord(s);
            if c.is_zero() {
                continue;
            }
            if c.is_negative() {
                write!(f, "-")?;
            } else if !first {
                write!(f, "+")?;
            }
            let a = c.abs();
            if !a.is_one() {
                write!(f, "{a}")?;
            }
            write!(f, "{}", s.symbol())?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for LatticeVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = self.0.iter().map(|c| format!("{}/{}", c.numer(), c.denom())).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticeVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<String> = Vec::deserialize(d)?;
        if v.len() != 4 {
            return Err(serde::de::Error::custom("lattice vector needs 4 coordinates"));
        }
        let mut out = [Q::zero(); 4];
        for (i, s) in v.iter().enumerate() {
            out[i] = parse_q(s).map_err(serde::de::Error::custom)?;
        }
        Ok(LatticeVector(out))
    }
}

/// Parses `p/q` or `p` into a machine rational, rejecting large entries.
pub fn parse_q(s: &str) -> Result<Q> {
    let r = crate::scalar::parse_rational(s)?;
    let bound = num_bigint::BigInt::from(1_000_000_000i64);
    if r.numer().abs() > bound || r.denom().abs() > bound {
        return Err(Error::Parse(format!("rational `{s}` is out of range")));
    }
    let n: i64 = r.numer().try_into().map_err(|_| Error::Parse(s.into()))?;
    let d: i64 = r.denom().try_into().map_err(|_| Error::Parse(s.into()))?;
    Ok(Q::new(n, d))
}

pub fn q_to_big(x: Q) -> num_rational::BigRational {
    num_rational::BigRational::new((*x.numer()).into(), (*x.denom()).into())
}

pub fn q_to_scalar(x: Q) -> Scalar {
    Scalar::from_rational(q_to_big(x))
}

/// Generalized binomial coefficient C(r, j) = r(r−1)…(r−j+1)/j!.
pub fn binom_q(r: Q, j: u32) -> num_rational::BigRational {
    let mut acc = num_rational::BigRational::one();
    let rb = q_to_big(r);
    for i in 0..j {
        let k = num_rational::BigRational::from_integer(i.into());
        acc = acc * (&rb - k) / num_rational::BigRational::from_integer((i + 1).into());
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_values() {
        let a = LatticeVector::alpha();
        let b = LatticeVector::beta();
        assert_eq!(pairing(&a, &a), qi(1));
        assert_eq!(pairing(&a, &b), qi(0));
        let v = LatticeVector::new(q(-1, 2), q(-1, 2), qi(1), qi(0));
        assert_eq!(pairing(&v, &LatticeVector::delta()), qi(1));
    }

    #[test]
    fn cocycle_examples() {
        let a = LatticeVector::alpha();
        let b = LatticeVector::beta();
        assert_eq!(cocycle(&a, &a).unwrap(), Scalar::one());
        let ratio = cocycle(&a, &b).unwrap().checked_div(&cocycle(&b, &a).unwrap()).unwrap();
        assert_eq!(ratio, Scalar::int(-1));
        let ab = a + b;
        assert_eq!(cocycle(&ab, &ab).unwrap(), Scalar::one());
        assert!(cocycle(&LatticeVector::new(q(1, 2), qi(0), qi(0), qi(0)), &a).is_err());
    }

    #[test]
    fn weights_of_exponentials() {
        assert_eq!(exp_weight(&LatticeVector::delta()), q(3, 2));
        assert_eq!(exp_weight(&LatticeVector::ints(1, 1, 0, 0)), qi(1));
        assert_eq!(exp_weight(&LatticeVector::ints(0, 0, -1, 0)), q(-1, 2));
    }

    #[test]
    fn charges() {
        let c = exp_charge(&LatticeVector::ints(1, 1, 0, 0));
        assert_eq!((c.h0, c.delta0, c.phi0), (qi(2), qi(0), qi(0)));
        let c = exp_charge(&LatticeVector::delta());
        assert_eq!((c.h0, c.delta0, c.phi0), (qi(1), qi(1), qi(0)));
    }

    #[test]
    fn binomials() {
        assert_eq!(binom_q(q(3, 2), 2), num_rational::BigRational::new(3.into(), 8.into()));
        assert_eq!(binom_q(qi(-1), 3), num_rational::BigRational::from_integer((-1).into()));
    }
}
