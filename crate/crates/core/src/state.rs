//! Fock monomials and finite linear combinations of them.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::lattice::{exp_charge, exp_weight, pairing, Charge, LatticeVector, Species, Q};
use crate::scalar::Scalar;

const MODE_MASK: u32 = (1 << 24) - 1;

/// One creation mode b(−n), packed so that ascending order of the packed
/// keys is species ascending, then mode descending.
#[inline]
pub fn pack(s: Species, n: u32) -> u32 {
    debug_assert!(n >= 1 && n < MODE_MASK);
    ((s as u32) << 24) | (MODE_MASK - n)
}

#[inline]
pub fn unpack(k: u32) -> (Species, u32) {
    (Species::from_index((k >> 24) as usize), MODE_MASK - (k & MODE_MASK))
}

pub type Modes = SmallVec<[u32; 8]>;

/// `b₁(−n₁)⋯b_k(−n_k) e^γ`, modes kept sorted (species, then descending n).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockMonomial {
    pub exponent: LatticeVector,
    pub modes: Modes,
}

impl FockMonomial {
    pub fn exp(exponent: LatticeVector) -> Self {
        FockMonomial { exponent, modes: Modes::new() }
    }

    pub fn vacuum() -> Self {
        Self::exp(LatticeVector::ZERO)
    }

    pub fn new(exponent: LatticeVector, modes: &[(Species, u32)]) -> Self {
        let mut m: Modes = modes.iter().map(|&(s, n)| pack(s, n)).collect();
        m.sort_unstable();
        FockMonomial { exponent, modes: m }
    }

    pub fn modes_iter(&self) -> impl Iterator<Item = (Species, u32)> + '_ {
        self.modes.iter().map(|&k| unpack(k))
    }

    /// The descending multiset of mode numbers of one species.
    pub fn species_modes(&self, s: Species) -> Vec<u32> {
        self.modes_iter().filter(|&(t, _)| t == s).map(|(_, n)| n).collect()
    }

    pub fn degree(&self) -> u32 {
        self.modes_iter().map(|(_, n)| n).sum()
    }

    pub fn weight(&self) -> Q {
        exp_weight(&self.exponent) + Q::from_integer(self.degree() as i64)
    }

    pub fn charge(&self) -> Charge {
        exp_charge(&self.exponent)
    }

    /// ⟨γ,γ⟩ mod 2, defined for integral exponents; for shifted cosets the
    /// parity is read off the floor of the exponent.
    pub fn parity(&self) -> u8 {
        let f = self.exponent.floor();
        let n: i64 = (0..4).map(|i| f[i] * f[i]).sum();
        (n.rem_euclid(2)) as u8
    }

    pub fn with_mode(&self, s: Species, n: u32) -> Self {
        let k = pack(s, n);
        let mut modes = self.modes.clone();
        let pos = modes.partition_point(|&x| x < k);
        modes.insert(pos, k);
        FockMonomial { exponent: self.exponent, modes }
    }
}

/// Merges two sorted mode lists.
pub fn merge_modes(a: &[u32], b: &[u32]) -> Modes {
    let mut out = Modes::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl fmt::Display for FockMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (s, n) in self.modes_iter() {
            write!(f, "{}(-{})", s.symbol(), n)?;
            wrote = true;
        }
        if !self.exponent.is_zero() {
            write!(f, "e^{{{}}}", self.exponent)?;
        } else if !wrote {
            write!(f, "1")?;
        }
        Ok(())
    }
}

impl fmt::Debug for FockMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finitely supported combination of monomials with no zero coefficients.
#[derive(Clone, PartialEq, Eq, Default, Hash)]
pub struct State {
    terms: BTreeMap<FockMonomial, Scalar>,
}

impl State {
    pub fn zero() -> Self {
        State::default()
    }

    pub fn vacuum() -> Self {
        Self::monomial(FockMonomial::vacuum())
    }

    pub fn monomial(m: FockMonomial) -> Self {
        Self::term(Scalar::one(), m)
    }

    pub fn term(c: Scalar, m: FockMonomial) -> Self {
        let mut s = State::zero();
        s.add_term(m, c);
        s
    }

    pub fn exp(gamma: LatticeVector) -> Self {
        Self::monomial(FockMonomial::exp(gamma))
    }

    /// `b(−n) e^0`, i.e. the state `b(−n)1`.
    pub fn heis(s: Species, n: u32) -> Self {
        Self::monomial(FockMonomial::new(LatticeVector::ZERO, &[(s, n)]))
    }

    /// `v(−n)1` for a general vector v = Σ v_b b.
    pub fn heis_vec(v: &LatticeVector, n: u32) -> Self {
        let mut out = State::zero();
        for s in Species::ALL {
            let c = v.coord(s);
            if !c.is_zero() {
                out.add_term(
                    FockMonomial::new(LatticeVector::ZERO, &[(s, n)]),
                    crate::lattice::q_to_scalar(c),
                );
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockMonomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (FockMonomial, Scalar)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, m: &FockMonomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn leading(&self) -> Option<(&FockMonomial, &Scalar)> {
        self.terms.iter().next()
    }

    pub fn add_term(&mut self, m: FockMonomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &State, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        for (m, x) in &other.terms {
            self.add_term(m.clone(), x * c);
        }
    }

    pub fn add_assign(&mut self, other: &State) {
        for (m, x) in &other.terms {
            self.add_term(m.clone(), x.clone());
        }
    }

    pub fn scaled(&self, c: &Scalar) -> State {
        if c.is_zero() {
            return State::zero();
        }
        State { terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    pub fn plus(&self, other: &State) -> State {
        let mut s = self.clone();
        s.add_assign(other);
        s
    }

    pub fn minus(&self, other: &State) -> State {
        let mut s = self.clone();
        s.add_scaled(other, &Scalar::int(-1));
        s
    }

    pub fn neg(&self) -> State {
        self.scaled(&Scalar::int(-1))
    }

    /// Drops zero coefficients and merges duplicates; a no-op on values built
    /// through the public API, kept for deserialized input.
    pub fn normalize(&self) -> State {
        let mut s = State::zero();
        for (m, c) in &self.terms {
            s.add_term(m.clone(), c.clone());
        }
        s
    }

    /// Common charge of all monomials.
    pub fn charge(&self) -> Result<Charge> {
        let mut it = self.terms.keys().map(|m| m.charge());
        let first = it.next().unwrap_or_default();
        if it.any(|c| c != first) {
            return Err(Error::NotHomogeneous(format!("mixed charges in {self}")));
        }
        Ok(first)
    }

    pub fn is_charge_homogeneous(&self) -> bool {
        self.charge().is_ok()
    }

    pub fn parity(&self) -> Result<u8> {
        let mut it = self.terms.keys().map(|m| m.parity());
        let first = it.next().unwrap_or(0);
        if it.any(|p| p != first) {
            return Err(Error::NotHomogeneous(format!("mixed parity in {self}")));
        }
        Ok(first)
    }

    /// L(0)-eigenvalue of a homogeneous state.
    pub fn weight(&self) -> Result<Q> {
        let mut it = self.terms.keys().map(|m| m.weight());
        let first = it.next().unwrap_or_default();
        if it.any(|w| w != first) {
            return Err(Error::NotHomogeneous(format!("mixed weights in {self}")));
        }
        Ok(first)
    }

    /// Splits into weight-homogeneous components.
    pub fn by_weight(&self) -> BTreeMap<Q, State> {
        let mut out: BTreeMap<Q, State> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.weight()).or_default().add_term(m.clone(), c.clone());
        }
        out
    }

    /// Rescales so that the leading coefficient is one.
    pub fn monic(&self) -> State {
        match self.leading() {
            Some((_, c)) => self.scaled(&c.inv().expect("nonzero")),
            None => State::zero(),
        }
    }

    /// `b(−n)` applied on the left (creation modes commute with everything
    /// but exponentials only through zero modes, which this does not touch).
    pub fn create(&self, s: Species, n: u32) -> State {
        let mut out = State::zero();
        for (m, c) in &self.terms {
            out.add_term(m.with_mode(s, n), c.clone());
        }
        out
    }

    /// Product of creation operators from `poly` (exponent ignored) with `self`.
    pub fn times_creation(&self, poly: &State) -> State {
        let mut out = State::zero();
        for (p, a) in &poly.terms {
            for (m, b) in &self.terms {
                out.add_term(
                    FockMonomial { exponent: m.exponent, modes: merge_modes(&p.modes, &m.modes) },
                    a * b,
                );
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "({c}){m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

trait IsOne {
    fn is_one(&self) -> bool;
}

impl IsOne for Scalar {
    fn is_one(&self) -> bool {
        *self == Scalar::one()
    }
}

#[derive(Serialize, Deserialize)]
struct MonoRepr {
    exponent: LatticeVector,
    modes: BTreeMap<String, Vec<u32>>,
}

fn modes_repr(m: &FockMonomial) -> BTreeMap<String, Vec<u32>> {
    let mut modes = BTreeMap::new();
    for sp in Species::ALL {
        let v = m.species_modes(sp);
        if !v.is_empty() {
            modes.insert(sp.name().to_string(), v);
        }
    }
    modes
}

fn modes_from_repr<E: serde::de::Error>(r: &BTreeMap<String, Vec<u32>>) -> std::result::Result<Vec<(Species, u32)>, E> {
    let mut modes = Vec::new();
    for (name, ns) in r {
        let sp = Species::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| E::custom(format!("unknown species {name}")))?;
        for &n in ns {
            if n == 0 {
                return Err(E::custom("creation modes are positive"));
            }
            modes.push((sp, n));
        }
    }
    Ok(modes)
}

impl Serialize for FockMonomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MonoRepr { exponent: self.exponent, modes: modes_repr(self) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FockMonomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MonoRepr::deserialize(d)?;
        Ok(FockMonomial::new(r.exponent, &modes_from_repr(&r.modes)?))
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exponent: LatticeVector,
    modes: BTreeMap<String, Vec<u32>>,
    coeff: Scalar,
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    terms: Vec<TermRepr>,
}

impl Serialize for State {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| TermRepr { exponent: m.exponent, modes: modes_repr(m), coeff: c.clone() })
            .collect();
        StateRepr { terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for State {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = StateRepr::deserialize(d)?;
        let mut out = State::zero();
        for t in r.terms {
            out.add_term(FockMonomial::new(t.exponent, &modes_from_repr(&t.modes)?), t.coeff);
        }
        Ok(out)
    }
}

/// ⟨b, γ⟩ for a species b.
pub fn species_pairing(s: Species, v: &LatticeVector) -> Q {
    pairing(&LatticeVector::basis(s), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::qi;

    #[test]
    fn normal_form_sorted() {
        let m = FockMonomial::new(
            LatticeVector::ZERO,
            &[(Species::Beta, 1), (Species::Alpha, 1), (Species::Alpha, 3)],
        );
        assert_eq!(m.species_modes(Species::Alpha), vec![3, 1]);
        assert_eq!(m.to_string(), "α(-3)α(-1)β(-1)");
        assert_eq!(m.degree(), 5);
    }

    #[test]
    fn cancellation_removes_terms() {
        let mut s = State::heis(Species::Alpha, 1);
        s.add_term(FockMonomial::new(LatticeVector::ZERO, &[(Species::Alpha, 1)]), Scalar::int(-1));
        assert!(s.is_zero());
    }

    #[test]
    fn json_round_trip() {
        let mut s = State::exp(LatticeVector::ints(1, 1, -1, 0)).create(Species::Delta, 1);
        s.add_term(FockMonomial::exp(LatticeVector::ZERO), Scalar::inv_sqrt2());
        let j = serde_json::to_string(&s).unwrap();
        let back: State = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert_eq!(serde_json::to_string(&back).unwrap(), j);
    }

    #[test]
    fn charge_and_parity() {
        let e = State::exp(LatticeVector::ints(1, 1, 0, 0));
        assert_eq!(e.charge().unwrap().h0, qi(2));
        assert_eq!(e.parity().unwrap(), 0);
        assert_eq!(State::exp(LatticeVector::delta()).parity().unwrap(), 1);
        assert_eq!(State::vacuum().charge().unwrap(), Charge::default());
    }
}
