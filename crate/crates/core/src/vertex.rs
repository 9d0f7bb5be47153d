//! Modes of lattice vertex operators acting on V_L and on shifted cosets.
//!
//! For `a = b₁(−n₁)⋯b_k(−n_k)e^γ` the field is the normal-ordered product
//! `:∂^{n₁−1}b₁(z)/(n₁−1)! ⋯ Y(e^γ,z):` with
//! `Y(e^γ,z) = e^γ ε_γ z^{γ(0)} E⁻(−γ,z) E⁺(−γ,z)`. All annihilation parts
//! (zero modes included) act first, then `z^{γ(0)}`, the exponential with its
//! cocycle, and finally the creation series.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{binom_q, cocycle_floor, pairing, LatticeVector, Species, Q};
use crate::scalar::Scalar;
use crate::lattice::Charge;
use crate::linalg::Echelon;
use crate::space::{GradedBlock, GradedDims, ShiftedSpace};
use crate::state::{merge_modes, pack, unpack, FockMonomial, Modes, State};

fn sbig(n: i64) -> Scalar {
    Scalar::int(n)
}

/// `C(n, k)` for small non-negative arguments.
fn binom_int(n: i64, k: i64) -> Scalar {
    let v: i128 = binomial(n as i128, k as i128);
    match i64::try_from(v) {
        Ok(v) => Scalar::int(v),
        Err(_) => Scalar::from_rational(BigRational::from_integer(BigInt::from(v))),
    }
}

/// Creation series of a field: coefficient polynomials (exponent ignored)
/// of `z^d` in `E⁻(−γ,z) Π_{i∈S} B_i⁺(z)` for the factors `S` in `mask`.
type Series = Vec<State>;

thread_local! {
    static SERIES_CACHE: RefCell<HashMap<(FockMonomial, u32), Rc<Series>>> = RefCell::new(HashMap::new());
}

fn creation_series(am: &FockMonomial, mask: u32, degree: usize) -> Rc<Series> {
    SERIES_CACHE.with(|c| {
        let key = (am.clone(), mask);
        if let Some(s) = c.borrow().get(&key) {
            if s.len() > degree {
                return s.clone();
            }
        }
        let s = Rc::new(build_series(am, mask, degree.max(4)));
        let mut cache = c.borrow_mut();
        if cache.len() > 20_000 {
            cache.clear();
        }
        cache.insert(key, s.clone());
        s
    })
}

fn build_series(am: &FockMonomial, mask: u32, degree: usize) -> Series {
    let gamma = am.exponent;
    // E⁻(−γ,z): E_d = (1/d) Σ_{k=1}^d γ(−k) E_{d−k}
    let mut e: Vec<State> = vec![State::vacuum()];
    for d in 1..=degree {
        let mut acc = State::zero();
        for k in 1..=d {
            for s in Species::ALL {
                let c = gamma.coord(s);
                if c.is_zero() {
                    continue;
                }
                let prev = &e[d - k];
                if prev.is_zero() {
                    continue;
                }
                acc.add_scaled(&prev.create(s, k as u32), &crate::lattice::q_to_scalar(c));
            }
        }
        e.push(acc.scaled(&Scalar::frac(1, d as i64)));
    }
    // multiply by each B⁺_i(z) = Σ_d C(d+m, m) z^d b(−(d+m+1))
    for (i, (s, n)) in am.modes_iter().enumerate() {
        if mask & (1 << i) == 0 {
            continue;
        }
        let m = (n - 1) as usize;
        let mut out = vec![State::zero(); degree + 1];
        for (d0, poly) in e.iter().enumerate() {
            if poly.is_zero() {
                continue;
            }
            for d in 0..=(degree - d0) {
                let term = poly.create(s, (d + m + 1) as u32);
                out[d0 + d].add_scaled(&term, &binom_int((d + m) as i64, m as i64));
            }
        }
        e = out;
    }
    e
}

/// Keyed accumulator for intermediate `(z-power, monomial, creation mask)`
/// terms; bit i of the mask marks factor i as taken by its creation part.
type Terms = HashMap<(i64, FockMonomial, u32), Scalar>;

fn push(t: &mut Terms, zp: i64, m: FockMonomial, mask: u32, c: Scalar) {
    if c.is_zero() {
        return;
    }
    use std::collections::hash_map::Entry;
    match t.entry((zp, m, mask)) {
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

/// Removes one copy of `b(−k)`; returns the multiplicity that was present.
fn remove_mode(modes: &Modes, key: u32) -> Option<(Modes, usize)> {
    let lo = modes.partition_point(|&x| x < key);
    let hi = modes.partition_point(|&x| x <= key);
    if lo == hi {
        return None;
    }
    let mut out = modes.clone();
    out.remove(lo);
    Some((out, hi - lo))
}

/// Applies the annihilation parts of the Heisenberg factors of `am`.
fn apply_annihilators(am: &FockMonomial, wm: &FockMonomial) -> Terms {
    let mu = wm.exponent;
    let mut cur: Terms = HashMap::new();
    cur.insert((0, wm.clone(), 0), Scalar::one());
    for (i, (s, n)) in am.modes_iter().enumerate() {
        let m = (n - 1) as i64;
        let g = s.gram();
        let sign_m = if m % 2 == 0 { 1 } else { -1 };
        let mut next: Terms = HashMap::new();
        for ((zp, mono, mask), c) in cur {
            // creation part, applied last
            push(&mut next, zp, mono.clone(), mask | (1 << i), c.clone());
            // zero mode: ⟨b, μ⟩ z^{−1−m}
            let bm = mu.coord(s) * g;
            if !bm.is_zero() {
                let f = crate::lattice::q_to_scalar(bm * sign_m);
                push(&mut next, zp - 1 - m, mono.clone(), mask, &c * &f);
            }
            // b(k), k ≥ 1, against each distinct b(−k) present
            let mut seen = Vec::new();
            for (t, k) in mono.modes_iter() {
                if t != s || seen.contains(&k) {
                    continue;
                }
                seen.push(k);
                let (rest, mult) = remove_mode(&mono.modes, pack(s, k)).expect("present");
                let coef = binom_int(k as i64 + m, m).scale_int(sign_m * (mult as i64) * (k as i64) * g);
                let nm = FockMonomial { exponent: mono.exponent, modes: rest };
                push(&mut next, zp - k as i64 - 1 - m, nm, mask, &c * &coef);
            }
        }
        cur = next;
    }
    cur
}

/// Applies E⁺(−γ,z) = exp(−Σ γ(n) z^{−n}/n).
fn apply_eplus(gamma: &LatticeVector, terms: Terms) -> Terms {
    if gamma.is_zero() {
        return terms;
    }
    let mut out: Terms = HashMap::new();
    for ((zp, mono, mask), c) in terms {
        // group modes by (species, n) with ⟨γ, b⟩ ≠ 0
        let mut groups: Vec<(u32, usize, Q)> = Vec::new(); // key, count, −γ_b G_b
        let mut i = 0;
        let ms = &mono.modes;
        while i < ms.len() {
            let key = ms[i];
            let mut j = i;
            while j < ms.len() && ms[j] == key {
                j += 1;
            }
            let (s, _) = unpack(key);
            let f = -gamma.coord(s) * s.gram();
            if !f.is_zero() {
                groups.push((key, j - i, f));
            }
            i = j;
        }
        if groups.is_empty() {
            push(&mut out, zp, mono, mask, c);
            continue;
        }
        // expand Π_groups Σ_{j ≤ count} C(count, j) f^j z^{−n j}
        let mut partial: Vec<(i64, Modes, Scalar)> = vec![(zp, mono.modes.clone(), c)];
        for &(key, count, f) in &groups {
            let (_, n) = unpack(key);
            let fb = crate::lattice::q_to_scalar(f);
            let mut next = Vec::with_capacity(partial.len() * (count + 1));
            for (z, modes, coef) in partial {
                let mut md = modes.clone();
                let mut pw = coef;
                for j in 0..=count {
                    next.push((z - (n as i64) * j as i64, md.clone(), &pw * &binom_int(count as i64, j as i64)));
                    if j < count {
                        let pos = md.partition_point(|&x| x < key);
                        md.remove(pos);
                        pw = &pw * &fb;
                    }
                }
            }
            partial = next;
        }
        for (z, modes, coef) in partial {
            push(&mut out, z, FockMonomial { exponent: mono.exponent, modes }, mask, coef);
        }
    }
    out
}

/// All coefficients `z^k` (as `k ↦ state`) of `Y(a,z)w` for one pair of
/// monomials with `k ≤ kmax`; if `exact` is set only that power is produced.
fn expand_pair(
    am: &FockMonomial,
    ac: &Scalar,
    wm: &FockMonomial,
    wc: &Scalar,
    kmax: Q,
    exact: bool,
    out: &mut BTreeMap<Q, State>,
) {
    let gamma = am.exponent;
    let mu = wm.exponent;
    let p = pairing(&gamma, &mu);
    let terms = apply_eplus(&gamma, apply_annihilators(am, wm));
    if terms.is_empty() {
        return;
    }
    let eps = cocycle_floor(&gamma, &mu);
    let base = ac * wc;
    let base = if eps < 0 { -base } else { base };
    let new_exp = mu + gamma;
    // degree needed from each creation series
    let mut need: HashMap<u32, usize> = HashMap::new();
    let mut kept = Vec::with_capacity(terms.len());
    for ((zp, mono, mask), c) in terms {
        let lead = p + Q::from_integer(zp);
        let gap = kmax - lead;
        if gap < Q::zero() || (exact && !gap.is_integer()) {
            continue;
        }
        let g = gap.floor().to_integer() as usize;
        let e = need.entry(mask).or_default();
        *e = (*e).max(g);
        kept.push((lead, g, mono, mask, c));
    }
    if kept.is_empty() {
        return;
    }
    let all_series: HashMap<u32, Rc<Series>> =
        need.into_iter().map(|(mask, d)| (mask, creation_series(am, mask, d))).collect();
    for (lead, g, mono, mask, c) in kept {
        let series = &all_series[&mask];
        let coef = &c * &base;
        let shifted = FockMonomial { exponent: new_exp, modes: mono.modes };
        let range: Box<dyn Iterator<Item = usize>> = if exact { Box::new(std::iter::once(g)) } else { Box::new(0..=g) };
        for d in range {
            let poly = &series[d];
            if poly.is_zero() {
                continue;
            }
            let entry = out.entry(lead + Q::from_integer(d as i64)).or_default();
            for (pm, pc) in poly.terms() {
                entry.add_term(
                    FockMonomial { exponent: new_exp, modes: merge_modes(&pm.modes, &shifted.modes) },
                    pc * &coef,
                );
            }
        }
    }
}

/// Coefficients of `Y(a,z)w` at all powers `z^k` with `k ≤ kmax`.
///
/// ```
/// use voalab_core::{lattice::LatticeVector, state::State, vertex::field_expansion};
/// use voalab_core::lattice::qi;
/// let e = State::exp(LatticeVector::ints(1, 1, 0, 0));
/// let f = State::exp(LatticeVector::ints(-1, -1, 0, 0));
/// // ⟨α+β, −α−β⟩ = 0: no singular terms
/// let ser = field_expansion(&e, &f, qi(-1));
/// assert!(ser.values().all(|s| s.is_zero()));
/// ```
pub fn field_expansion(a: &State, w: &State, kmax: Q) -> BTreeMap<Q, State> {
    let mut out = BTreeMap::new();
    for (am, ac) in a.terms() {
        for (wm, wc) in w.terms() {
            expand_pair(am, ac, wm, wc, kmax, false, &mut out);
        }
    }
    out.retain(|_, s| !s.is_zero());
    out
}

/// The mode `a_n w`, i.e. the coefficient of `z^{−n−1}` in `Y(a,z)w`.
pub fn mode_action(a: &State, n: Q, w: &State) -> Result<State> {
    let k = -n - Q::one();
    for (am, _) in a.terms() {
        for (wm, _) in w.terms() {
            let p = pairing(&am.exponent, &wm.exponent);
            if !(k - p).is_integer() {
                return Err(Error::IndexOutsideCoset {
                    index: n.to_string(),
                    coset: format!("{} + Z", -p),
                });
            }
        }
    }
    Ok(mode_unchecked(a, n, w))
}

/// `a_n w` without the coset check; terms in other cosets contribute zero.
pub fn mode_unchecked(a: &State, n: Q, w: &State) -> State {
    let k = -n - Q::one();
    let mut out = BTreeMap::new();
    for (am, ac) in a.terms() {
        for (wm, wc) in w.terms() {
            expand_pair(am, ac, wm, wc, k, true, &mut out);
        }
    }
    out.remove(&k).unwrap_or_default()
}

/// The n-th product `a_(n) b` for integer n.
pub fn product(a: &State, n: i64, b: &State) -> Result<State> {
    mode_action(a, Q::from_integer(n), b)
}

/// `Σ λ^j/j! a_(j) b` as the list of nonzero `(j, a_(j)b)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LambdaBracket {
    pub entries: Vec<(u32, State)>,
}

impl LambdaBracket {
    pub fn get(&self, j: u32) -> State {
        self.entries.iter().find(|(k, _)| *k == j).map(|(_, s)| s.clone()).unwrap_or_default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn from_map(m: BTreeMap<u32, State>) -> Self {
        LambdaBracket { entries: m.into_iter().filter(|(_, s)| !s.is_zero()).collect() }
    }
}

pub fn lambda_bracket(a: &State, b: &State) -> LambdaBracket {
    let ser = field_expansion(a, b, -Q::one());
    let mut m = BTreeMap::new();
    for (k, s) in ser {
        if !k.is_integer() {
            continue;
        }
        let j = -k.to_integer() - 1;
        if j >= 0 && !s.is_zero() {
            m.insert(j as u32, s);
        }
    }
    LambdaBracket::from_map(m)
}

/// Translation operator D = L(−1).
pub fn translate(a: &State) -> State {
    let mut out = State::zero();
    for (m, c) in a.terms() {
        // D e^γ = γ(−1)e^γ
        for s in Species::ALL {
            let g = m.exponent.coord(s);
            if !g.is_zero() {
                out.add_term(m.with_mode(s, 1), c * &crate::lattice::q_to_scalar(g));
            }
        }
        // D b(−n) = n b(−n−1)
        let modes: Vec<(Species, u32)> = m.modes_iter().collect();
        for i in 0..modes.len() {
            if i > 0 && modes[i] == modes[i - 1] {
                continue;
            }
            let mult = modes.iter().filter(|x| **x == modes[i]).count();
            let (s, n) = modes[i];
            let mut rest = m.modes.clone();
            let pos = rest.partition_point(|&x| x < pack(s, n));
            rest.remove(pos);
            let base = FockMonomial { exponent: m.exponent, modes: rest };
            out.add_term(base.with_mode(s, n + 1), c * &sbig((n as usize * mult) as i64));
        }
    }
    out
}

/// `D^k a / k!`.
pub fn translate_pow(a: &State, k: u32) -> State {
    let mut s = a.clone();
    for i in 1..=k {
        s = translate(&s).scaled(&Scalar::frac(1, i as i64));
    }
    s
}

/// L(0)-weight of a homogeneous state.
pub fn weight(a: &State) -> Result<Q> {
    a.weight()
}

/// The super-sign `(−1)^{|a||b|}`.
pub fn super_sign(a: &State, b: &State) -> Result<i64> {
    let pa = a.parity()?;
    let pb = b.parity()?;
    Ok(if pa == 1 && pb == 1 { -1 } else { 1 })
}

/// Checks `[a_m, b_n]c = Σ_j C(m,j) (a_(j)b)_{m+n−j} c` exactly.
pub fn commutator_check(a: &State, b: &State, m: Q, n: Q, c: &State) -> Result<bool> {
    let (lhs, rhs) = commutator_sides(a, b, m, n, c)?;
    Ok(lhs == rhs)
}

/// Both sides of the commutator formula.
pub fn commutator_sides(a: &State, b: &State, m: Q, n: Q, c: &State) -> Result<(State, State)> {
    let sign = super_sign(a, b)?;
    let bc = mode_action(b, n, c)?;
    let ac = mode_action(a, m, c)?;
    let mut lhs = mode_unchecked(a, m, &bc);
    let second = mode_unchecked(b, n, &ac);
    lhs.add_scaled(&second, &sbig(-sign));
    let mut rhs = State::zero();
    for (j, ab) in lambda_bracket(a, b).entries {
        let coef = binom_q(m, j);
        if coef.is_zero() {
            continue;
        }
        let idx = m + n - Q::from_integer(j as i64);
        let t = mode_unchecked(&ab, idx, c);
        rhs.add_scaled(&t, &Scalar::from_rational(coef));
    }
    Ok((lhs, rhs))
}

/// Right side of skew-symmetry: `−(−1)^{|a||b|} Σ_j (−1)^{n+j}/j! D^j(b_(n+j)a)`.
pub fn skew_rhs(a: &State, b: &State, n: i64) -> Result<State> {
    let sign = super_sign(a, b)?;
    let mut out = State::zero();
    let ser = field_expansion(b, a, Q::from_integer(-n - 1));
    for (k, s) in ser {
        if !k.is_integer() {
            continue;
        }
        let idx = -k.to_integer() - 1; // b_(idx) a
        let j = idx - n;
        if j < 0 {
            continue;
        }
        let t = translate_pow(&s, j as u32);
        let sg = if (n + j) % 2 == 0 { 1 } else { -1 };
        out.add_scaled(&t, &sbig(-sign * sg));
    }
    Ok(out)
}

/// Generalized binomial `C(r, j)`.
pub fn binom(r: Q, j: u32) -> Scalar {
    Scalar::from_rational(binom_q(r, j))
}

/// Convenience: `(1+x)^r / x^k` applied through `Res_x Y(a,x)`, i.e.
/// `Σ_j C(r,j) a_(j−k) b`.
pub fn residue_with_binomial(a: &State, r: Q, k: i64, b: &State) -> State {
    let ser = field_expansion(a, b, Q::from_integer(k - 1));
    let mut out = State::zero();
    for (pw, s) in ser {
        if !pw.is_integer() {
            continue;
        }
        // coefficient of x^pw is a_(−pw−1); need a_(j−k): j = k − pw − 1
        let j = k - pw.to_integer() - 1;
        if j < 0 {
            continue;
        }
        out.add_scaled(&s, &binom(r, j as u32));
    }
    out
}

/// A single mode `a_n` as a linear operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldMode {
    pub source: State,
    pub index: Q,
}

impl FieldMode {
    pub fn new(source: State, index: Q) -> Self {
        FieldMode { source, index }
    }

    pub fn apply(&self, w: &State) -> State {
        mode_unchecked(&self.source, self.index, w)
    }
}

/// `w ↦ v₀ w = Res_z Y(v,z)w` between two shifted spaces. On blocks where
/// the residue exponent is not integral the map is zero.
#[derive(Clone, Debug)]
pub struct ScreeningMap {
    pub vector: State,
    pub source: ShiftedSpace,
    pub target: ShiftedSpace,
}

impl ScreeningMap {
    pub fn apply(&self, w: &State) -> State {
        mode_unchecked(&self.vector, Q::zero(), w)
    }

    /// Applies the map and checks that the image lands in the target space.
    pub fn apply_checked(&self, w: &State) -> Result<State> {
        self.source.check_state(w)?;
        let out = self.apply(w);
        self.target.check_state(&out)?;
        Ok(out)
    }
}

pub fn screening_map(v: &State, source: &ShiftedSpace, target: &ShiftedSpace) -> ScreeningMap {
    ScreeningMap { vector: v.clone(), source: source.clone(), target: target.clone() }
}

/// Nullspace of `op` on a block, re-checked so that every output is
/// annihilated exactly.
pub fn kernel_block(op: &dyn Fn(&State) -> State, block: &GradedBlock) -> Vec<State> {
    let basis = block.states();
    let k = crate::linalg::joint_kernel(&basis, &[op]);
    debug_assert!(k.iter().all(|v| op(v).is_zero()));
    k
}

/// A weight-truncated subspace stored blockwise as echelon bases.
#[derive(Clone, Debug, Default)]
pub struct Generated {
    pub max_weight: Q,
    pub blocks: BTreeMap<(Q, Charge), Echelon>,
}

impl Generated {
    pub fn dims(&self) -> GradedDims {
        self.blocks.iter().map(|(k, e)| (*k, e.dim())).filter(|(_, d)| *d > 0).collect()
    }

    pub fn dim(&self, weight: Q, charge: Charge) -> usize {
        self.blocks.get(&(weight, charge)).map_or(0, |e| e.dim())
    }

    pub fn basis(&self, weight: Q, charge: Charge) -> Vec<State> {
        self.blocks.get(&(weight, charge)).map(|e| e.rows().to_vec()).unwrap_or_default()
    }

    /// Membership of an arbitrary state, component by component.
    pub fn contains(&self, s: &State) -> bool {
        let mut parts: BTreeMap<(Q, Charge), State> = BTreeMap::new();
        for (m, c) in s.terms() {
            parts.entry((m.weight(), m.charge())).or_default().add_term(m.clone(), c.clone());
        }
        parts.iter().all(|(k, p)| self.blocks.get(k).is_some_and(|e| e.contains(p)))
    }

    fn insert(&mut self, s: &State) -> Option<State> {
        let key = (s.weight().ok()?, s.charge().ok()?);
        let e = self.blocks.entry(key).or_default();
        let before = e.dim();
        e.insert(s, 0);
        (e.dim() > before).then(|| e.rows().last().cloned().expect("row"))
    }
}

/// Closure of the seeds under all modes of the generators, truncated at
/// `max_weight`. For vertex algebras generated by the listed fields (and
/// for lowest-weight seeds) every element is reached through states of
/// weight at most its own, so the truncation is exact.
pub fn generated_subspace(generators: &[State], seeds: &[State], max_weight: Q) -> Result<Generated> {
    if max_weight.is_negative() || !(max_weight * 2).is_integer() {
        return Err(Error::Precondition(format!("cutoff {max_weight} is not a non-negative half-integer")));
    }
    let mut gw = Vec::new();
    for g in generators {
        g.charge()?;
        gw.push(g.weight()?);
    }
    let mut out = Generated { max_weight, blocks: BTreeMap::new() };
    let mut queue = std::collections::VecDeque::new();
    for s in seeds {
        for (_, part) in s.by_weight() {
            if part.weight()? <= max_weight {
                if let Some(r) = out.insert(&part) {
                    queue.push_back(r);
                }
            }
        }
    }
    while let Some(v) = queue.pop_front() {
        let wv = v.weight()?;
        for (g, wg) in generators.iter().zip(&gw) {
            let kmax = max_weight - *wg - wv;
            for (_, s) in field_expansion(g, &v, kmax) {
                for (_, part) in s.by_weight() {
                    if let Some(r) = out.insert(&part) {
                        queue.push_back(r);
                    }
                }
            }
        }
    }
    Ok(out)
}

