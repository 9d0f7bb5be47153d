//! Shifted lattice spaces `V_{L'+s}` and their (weight, charge) blocks.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{exp_charge, exp_weight, Charge, LatticeVector, Species, Q};
use crate::state::{pack, FockMonomial, Modes, State};

/// Exponents `shift + ℤ-span(sublattice)` tensored with the Fock space of
/// the listed Heisenberg species.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShiftedSpace {
    pub label: String,
    pub shift: LatticeVector,
    pub sublattice: Vec<LatticeVector>,
    pub species: Vec<Species>,
    /// Coefficient bound used when enumerating exponents.
    pub radius: i64,
}

impl fmt::Display for ShiftedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

impl ShiftedSpace {
    pub fn new(label: &str, shift: LatticeVector, sublattice: Vec<LatticeVector>, species: Vec<Species>) -> Result<Self> {
        for g in &sublattice {
            if !g.is_integral() {
                return Err(Error::NonIntegral(g.to_string()));
            }
        }
        let sp = ShiftedSpace { label: label.to_string(), shift, sublattice, species, radius: 12 };
        if sp.coordinates(&sp.shift).is_none() {
            return Err(Error::Precondition(format!("sublattice of `{label}` is degenerate")));
        }
        Ok(sp)
    }

    pub fn with_radius(mut self, r: i64) -> Self {
        self.radius = r;
        self
    }

    /// Integer coordinates of `mu − shift` in the sublattice, if any.
    pub fn coordinates(&self, mu: &LatticeVector) -> Option<Vec<i64>> {
        let d = *mu - self.shift;
        let k = self.sublattice.len();
        // Gaussian elimination on the 4 × k system
        let mut a: Vec<Vec<Q>> = (0..4)
            .map(|i| {
                let mut row: Vec<Q> = self.sublattice.iter().map(|g| g.0[i]).collect();
                row.push(d.0[i]);
                row
            })
            .collect();
        let mut piv_cols = Vec::new();
        let mut r = 0;
        for c in 0..k {
            let Some(p) = (r..4).find(|&i| !a[i][c].is_zero()) else {
                return None;
            };
            a.swap(p, r);
            let pv = a[r][c];
            for j in 0..=k {
                a[r][j] /= pv;
            }
            for i in 0..4 {
                if i != r && !a[i][c].is_zero() {
                    let f = a[i][c];
                    for j in 0..=k {
                        let t = a[r][j] * f;
                        a[i][j] -= t;
                    }
                }
            }
            piv_cols.push(c);
            r += 1;
        }
        if (r..4).any(|i| !a[i][k].is_zero()) {
            return None;
        }
        let mut out = vec![0; k];
        for (i, &c) in piv_cols.iter().enumerate() {
            if !a[i][k].is_integer() {
                return None;
            }
            out[c] = a[i][k].to_integer();
        }
        Some(out)
    }

    pub fn contains_exponent(&self, mu: &LatticeVector) -> bool {
        self.coordinates(mu).is_some()
    }

    /// Checks that every monomial of `s` lives in this space.
    pub fn check_state(&self, s: &State) -> Result<()> {
        for (m, _) in s.terms() {
            if !self.contains_exponent(&m.exponent) {
                return Err(Error::NotInSpace(m.exponent.to_string(), self.label.clone()));
            }
            if m.modes_iter().any(|(sp, _)| !self.species.contains(&sp)) {
                return Err(Error::NotInSpace(m.to_string(), self.label.clone()));
            }
        }
        Ok(())
    }

    /// All exponents in the coefficient box with weight ≤ `max_weight`
    /// (and weight ≡ `max_weight` mod ℤ) accepted by the charge filter.
    pub fn exponents(&self, max_weight: Q, keep: &dyn Fn(&Charge) -> bool) -> Vec<LatticeVector> {
        let k = self.sublattice.len();
        let r = self.radius;
        let mut out = Vec::new();
        let mut idx = vec![-r; k];
        loop {
            let mut mu = self.shift;
            for (c, g) in idx.iter().zip(&self.sublattice) {
                mu = mu + g.scale(Q::from_integer(*c));
            }
            let w = exp_weight(&mu);
            let gap = max_weight - w;
            if !gap.is_negative() && gap.is_integer() && keep(&exp_charge(&mu)) {
                out.push(mu);
            }
            let mut i = 0;
            loop {
                if i == k {
                    out.sort();
                    return out;
                }
                idx[i] += 1;
                if idx[i] <= r {
                    break;
                }
                idx[i] = -r;
                i += 1;
            }
        }
    }

    /// Monomials of weight exactly `weight` and the given charge.
    pub fn block(&self, weight: Q, charge: Charge) -> GradedBlock {
        let mut basis = Vec::new();
        for mu in self.exponents(weight, &|c| *c == charge) {
            let deg = (weight - exp_weight(&mu)).to_integer() as u32;
            for modes in partitions(&self.species, deg) {
                basis.push(FockMonomial { exponent: mu, modes });
            }
        }
        basis.sort();
        GradedBlock { space: self.label.clone(), weight, charge, basis }
    }

    /// Every nonempty block with weight in `weights` and charge accepted by
    /// `keep`, in (weight, charge) order.
    pub fn blocks(&self, weights: &[Q], keep: &dyn Fn(&Charge) -> bool) -> Vec<GradedBlock> {
        let mut out = Vec::new();
        for &w in weights {
            let mut by_charge: BTreeMap<Charge, Vec<FockMonomial>> = BTreeMap::new();
            for mu in self.exponents(w, keep) {
                let deg = (w - exp_weight(&mu)).to_integer() as u32;
                let c = exp_charge(&mu);
                for modes in partitions(&self.species, deg) {
                    by_charge.entry(c).or_default().push(FockMonomial { exponent: mu, modes });
                }
            }
            for (c, mut basis) in by_charge {
                basis.sort();
                out.push(GradedBlock { space: self.label.clone(), weight: w, charge: c, basis });
            }
        }
        out
    }
}

/// A finite (weight, charge) piece with its monomial basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedBlock {
    pub space: String,
    #[serde(with = "crate::lattice::qserde")]
    pub weight: Q,
    pub charge: Charge,
    pub basis: Vec<FockMonomial>,
}

impl GradedBlock {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn states(&self) -> Vec<State> {
        self.basis.iter().cloned().map(State::monomial).collect()
    }
}

/// Half-integer weights `start, start+½, …, max`.
pub fn weight_range(start: Q, max: Q) -> Vec<Q> {
    let half = Q::new(1, 2);
    let mut out = Vec::new();
    let mut w = start;
    while w <= max {
        out.push(w);
        w += half;
    }
    out
}

thread_local! {
    static PARTITIONS: RefCell<HashMap<(Vec<Species>, u32), Vec<Modes>>> = RefCell::new(HashMap::new());
}

/// Multicolored partitions of `deg` with colors `species`, as sorted mode
/// lists, in canonical order.
pub fn partitions(species: &[Species], deg: u32) -> Vec<Modes> {
    let key = (species.to_vec(), deg);
    if let Some(v) = PARTITIONS.with(|c| c.borrow().get(&key).cloned()) {
        return v;
    }
    let mut keys: Vec<u32> = Vec::new();
    for &s in species {
        for n in 1..=deg.max(1) {
            keys.push(pack(s, n));
        }
    }
    keys.sort_unstable();
    let mut out = Vec::new();
    let mut cur = Modes::new();
    fn rec(keys: &[u32], start: usize, left: u32, cur: &mut Modes, out: &mut Vec<Modes>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..keys.len() {
            let (_, n) = crate::state::unpack(keys[i]);
            if n > left {
                continue;
            }
            cur.push(keys[i]);
            rec(keys, i, left - n, cur, out);
            cur.pop();
        }
    }
    rec(&keys, 0, deg, &mut cur, &mut out);
    PARTITIONS.with(|c| c.borrow_mut().insert(key, out.clone()));
    out
}

/// Bigraded dimension table keyed by (weight, charge).
pub type GradedDims = BTreeMap<(Q, Charge), usize>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::qi;

    #[test]
    fn partition_counts() {
        let one = [Species::Alpha];
        let p: Vec<usize> = (0..7).map(|d| partitions(&one, d).len()).collect();
        assert_eq!(p, vec![1, 1, 2, 3, 5, 7, 11]);
        let two = [Species::Alpha, Species::Beta];
        let p: Vec<usize> = (0..5).map(|d| partitions(&two, d).len()).collect();
        assert_eq!(p, vec![1, 2, 5, 10, 20]);
    }

    #[test]
    fn membership() {
        let sp = ShiftedSpace::new(
            "t",
            LatticeVector::beta(),
            vec![LatticeVector::ints(1, 1, 0, 0), LatticeVector::delta()],
            vec![Species::Alpha],
        )
        .unwrap();
        assert!(sp.contains_exponent(&LatticeVector::ints(2, 3, -1, 0)));
        assert!(!sp.contains_exponent(&LatticeVector::ints(2, 2, 0, 0)));
        let b = sp.block(qi(0), exp_charge(&LatticeVector::beta()));
        assert!(b.basis.iter().all(|m| m.weight() == qi(0)));
    }
}
