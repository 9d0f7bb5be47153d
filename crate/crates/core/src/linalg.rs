//! Exact linear algebra over ℚ(√2): Bareiss elimination for kernels and an
//! incremental echelon basis for spans with witness tracking.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use crate::scalar::Scalar;
use crate::state::{FockMonomial, State};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.cols + c] = v;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Clears denominators column by column so the entries lie in ℤ[√2];
    /// column scaling does not change the kernel up to the same scaling,
    /// which is undone by [`nullspace`].
    fn clear_denominators(&mut self) -> Vec<BigInt> {
        let mut scales = Vec::with_capacity(self.cols);
        for c in 0..self.cols {
            let mut l = BigInt::one();
            for r in 0..self.rows {
                let v = self.get(r, c);
                l = l.lcm(v.rational_part().denom());
                l = l.lcm(v.root2_part().denom());
            }
            if !l.is_one() {
                let f = num_rational::BigRational::from_integer(l.clone());
                for r in 0..self.rows {
                    let v = self.get(r, c).scale_rational(&f);
                    self.set(r, c, v);
                }
            }
            scales.push(l);
        }
        scales
    }

    /// Bareiss forward elimination in place; returns the pivot columns.
    /// Pivots are the first nonzero entry at or below the current row.
    pub fn bareiss(&mut self) -> Vec<usize> {
        let mut prev = Scalar::one();
        let mut r = 0;
        let mut pivots = Vec::new();
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            self.swap_rows(p, r);
            let piv = self.get(r, c).clone();
            let inv_prev = prev.inv().expect("nonzero pivot");
            for i in (r + 1)..self.rows {
                let lead = self.get(i, c).clone();
                for j in (c + 1)..self.cols {
                    let a = &piv * self.get(i, j);
                    let b = &lead * self.get(r, j);
                    let v = &(&a - &b) * &inv_prev;
                    self.set(i, j, v);
                }
                self.set(i, c, Scalar::zero());
            }
            // rows above the pivot row keep their scale; later divisions
            // only touch rows below
            prev = piv;
            pivots.push(c);
            r += 1;
        }
        pivots
    }
}

/// Basis of `{x : M x = 0}`, one vector per free column with that entry 1.
pub fn nullspace(m: &Matrix) -> Vec<Vec<Scalar>> {
    let mut a = m.clone();
    let scales = a.clear_denominators();
    let pivots = a.bareiss();
    let mut free = Vec::new();
    let mut is_pivot = vec![false; a.cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    for c in 0..a.cols {
        if !is_pivot[c] {
            free.push(c);
        }
    }
    let mut out = Vec::with_capacity(free.len());
    for &f in &free {
        let mut x = vec![Scalar::zero(); a.cols];
        x[f] = Scalar::one();
        for (i, &pc) in pivots.iter().enumerate().rev() {
            let mut acc = Scalar::zero();
            for j in (pc + 1)..a.cols {
                if !x[j].is_zero() {
                    let t = a.get(i, j);
                    if !t.is_zero() {
                        acc += &(t * &x[j]);
                    }
                }
            }
            if !acc.is_zero() {
                x[pc] = -(acc.checked_div(a.get(i, pc)).expect("pivot"));
            }
        }
        // undo column scaling: M diag(s) y = 0  ⇔  M (diag(s) y) = 0
        for (c, s) in scales.iter().enumerate() {
            if !s.is_one() && !x[c].is_zero() {
                x[c] = x[c].scale_rational(&num_rational::BigRational::from_integer(s.clone()));
            }
        }
        let lead = x[f].clone();
        if lead != Scalar::one() {
            let inv = lead.inv().expect("nonzero");
            for v in &mut x {
                *v = &*v * &inv;
            }
        }
        out.push(x);
    }
    out
}

pub fn rank(m: &Matrix) -> usize {
    let mut a = m.clone();
    a.bareiss().len()
}

type Key = (usize, FockMonomial);

/// Sparse column of a stacked operator image, keyed by (operator, monomial).
fn sparse_column(col: &[State]) -> BTreeMap<Key, Scalar> {
    let mut out = BTreeMap::new();
    for (t, s) in col.iter().enumerate() {
        for (m, v) in s.terms() {
            out.insert((t, m.clone()), v.clone());
        }
    }
    out
}

/// Sparse column elimination. Each stored row is monic at its smallest key,
/// which is its pivot; columns reducing to zero yield relations.
struct SparseEchelon {
    rows: Vec<(BTreeMap<Key, Scalar>, BTreeMap<usize, Scalar>)>,
    pivots: HashMap<Key, usize>,
}

impl SparseEchelon {
    fn new() -> Self {
        SparseEchelon { rows: Vec::new(), pivots: HashMap::new() }
    }

    /// Reduces column `j`; returns the relation if it was dependent.
    fn push(&mut self, j: usize, mut v: BTreeMap<Key, Scalar>) -> Option<BTreeMap<usize, Scalar>> {
        let mut combo: BTreeMap<usize, Scalar> = BTreeMap::new();
        combo.insert(j, Scalar::one());
        let mut cursor: Option<Key> = None;
        loop {
            let next = match &cursor {
                None => v.iter().find(|(k, _)| self.pivots.contains_key(*k)),
                Some(c) => v
                    .range((std::ops::Bound::Excluded(c.clone()), std::ops::Bound::Unbounded))
                    .find(|(k, _)| self.pivots.contains_key(*k)),
            }
            .map(|(k, c)| (k.clone(), c.clone()));
            let Some((k, c)) = next else { break };
            let (row, rc) = &self.rows[self.pivots[&k]];
            for (rk, rv) in row {
                let e = v.entry(rk.clone()).or_default();
                *e -= &(rv * &c);
                if e.is_zero() {
                    v.remove(rk);
                }
            }
            for (t, x) in rc {
                let e = combo.entry(*t).or_default();
                *e -= &(x * &c);
            }
            cursor = Some(k);
        }
        combo.retain(|_, x| !x.is_zero());
        let Some((lead, c)) = v.iter().next().map(|(k, c)| (k.clone(), c.clone())) else {
            return Some(combo);
        };
        let inv = c.inv().expect("nonzero");
        for x in v.values_mut() {
            *x = &*x * &inv;
        }
        for x in combo.values_mut() {
            *x = &*x * &inv;
        }
        self.pivots.insert(lead, self.rows.len());
        self.rows.push((v, combo));
        None
    }
}

/// All combinations `c` with `Σ cᵢ imagesᵢ = 0`, where each column may be a
/// stack of images under several operators. Each relation is monic in the
/// last column it involves.
pub fn relations(columns: &[Vec<State>]) -> Vec<Vec<Scalar>> {
    let mut ech = SparseEchelon::new();
    let mut out = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        if let Some(rel) = ech.push(j, sparse_column(col)) {
            let mut x = vec![Scalar::zero(); columns.len()];
            for (t, c) in rel {
                x[t] = c;
            }
            out.push(x);
        }
    }
    out
}

/// Rank of a family of states.
pub fn span_rank(states: &[State]) -> usize {
    let mut ech = SparseEchelon::new();
    let mut r = 0;
    for (j, s) in states.iter().enumerate() {
        if ech.push(j, sparse_column(std::slice::from_ref(s))).is_none() {
            r += 1;
        }
    }
    r
}

pub fn combine(basis: &[State], coeffs: &[Scalar]) -> State {
    let mut out = State::zero();
    for (b, c) in basis.iter().zip(coeffs) {
        out.add_scaled(b, c);
    }
    out
}

/// Kernel of a family of linear maps restricted to the span of `basis`
/// (assumed linearly independent).
pub fn joint_kernel(basis: &[State], ops: &[&dyn Fn(&State) -> State]) -> Vec<State> {
    if ops.is_empty() {
        return basis.to_vec();
    }
    let cols: Vec<Vec<State>> = basis.iter().map(|b| ops.iter().map(|op| op(b)).collect()).collect();
    relations(&cols).iter().map(|c| combine(basis, c)).collect()
}

/// Echelon basis with distinct leading monomials; optionally tracks each
/// row as a combination of the tagged input vectors.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<State>,
    combos: Vec<BTreeMap<usize, Scalar>>,
    pivots: HashMap<FockMonomial, usize>,
    track: bool,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn tracking() -> Self {
        Echelon { track: true, ..Self::default() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[State] {
        &self.rows
    }

    /// Remainder of `v` after elimination and the combination subtracted.
    pub fn reduce(&self, v: &State) -> (State, BTreeMap<usize, Scalar>) {
        let mut v = v.clone();
        let mut combo: BTreeMap<usize, Scalar> = BTreeMap::new();
        let mut cursor: Option<FockMonomial> = None;
        loop {
            let next = v
                .terms()
                .filter(|(m, _)| cursor.as_ref().is_none_or(|c| *m > c))
                .find(|(m, _)| self.pivots.contains_key(*m))
                .map(|(m, c)| (m.clone(), c.clone()));
            let Some((m, c)) = next else { break };
            let r = self.pivots[&m];
            v.add_scaled(&self.rows[r], &-&c);
            if self.track {
                for (t, x) in &self.combos[r] {
                    let e = combo.entry(*t).or_default();
                    *e += &(x * &c);
                }
            }
            cursor = Some(m);
        }
        combo.retain(|_, x| !x.is_zero());
        (v, combo)
    }

    pub fn contains(&self, v: &State) -> bool {
        self.reduce(v).0.is_zero()
    }

    /// Inserts `v` (tagged `tag`); returns whether the span grew.
    pub fn insert(&mut self, v: &State, tag: usize) -> bool {
        let (rem, combo) = self.reduce(v);
        if rem.is_zero() {
            return false;
        }
        let (lead, c) = rem.leading().map(|(m, c)| (m.clone(), c.clone())).expect("nonzero");
        let inv = c.inv().expect("nonzero");
        let row = rem.scaled(&inv);
        if self.track {
            // row = (v − Σ combo·inputs)/c
            let mut rc: BTreeMap<usize, Scalar> = combo.into_iter().map(|(t, x)| (t, -(&x * &inv))).collect();
            let e = rc.entry(tag).or_default();
            *e += &inv;
            rc.retain(|_, x| !x.is_zero());
            self.combos.push(rc);
        } else {
            self.combos.push(BTreeMap::new());
        }
        self.pivots.insert(lead, self.rows.len());
        self.rows.push(row);
        true
    }

    /// If `v` lies in the span, its expression in the tagged inputs.
    pub fn express(&self, v: &State) -> Option<BTreeMap<usize, Scalar>> {
        let (rem, combo) = self.reduce(v);
        rem.is_zero().then_some(combo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeVector, Species};

    fn x(n: u32) -> State {
        State::heis(Species::Alpha, n)
    }

    #[test]
    fn kernel_of_dependent_columns() {
        let cols = vec![vec![x(1).plus(&x(2))], vec![x(1)], vec![x(2)]];
        let k = relations(&cols);
        assert_eq!(k.len(), 1);
        let v = &k[0];
        let s = combine(&[x(1).plus(&x(2)), x(1), x(2)], v);
        assert!(s.is_zero());
    }

    #[test]
    fn echelon_witness() {
        let mut e = Echelon::tracking();
        let a = x(1).plus(&x(3));
        let b = x(3).scaled(&Scalar::int(2));
        assert!(e.insert(&a, 0));
        assert!(e.insert(&b, 1));
        assert!(!e.insert(&a.plus(&b), 2));
        let target = x(1);
        let w = e.express(&target).unwrap();
        let mut s = State::zero();
        s.add_scaled(&a, &w.get(&0).cloned().unwrap_or_default());
        s.add_scaled(&b, &w.get(&1).cloned().unwrap_or_default());
        assert_eq!(s, target);
        assert!(e.express(&State::exp(LatticeVector::alpha())).is_none());
    }

    #[test]
    fn irrational_entries() {
        let r2 = Scalar::sqrt2();
        let cols = vec![vec![x(1).scaled(&r2)], vec![x(1).scaled(&Scalar::int(2))]];
        let k = relations(&cols);
        assert_eq!(k.len(), 1);
        let s = combine(&[x(1).scaled(&r2), x(1).scaled(&Scalar::int(2))], &k[0]);
        assert!(s.is_zero());
        assert_eq!(k[0][1], Scalar::one());
    }
}
