//! The A₂ level −3/2 currents inside V ⊗ F₋₁, the functor 𝓛ₛ, the
//! category 𝒪 vectors and the p = 2 coset.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::json;

use crate::amodules::{ModuleDescriptor, ModuleKind};
use crate::error::{Error, Result};
use crate::lattice::{exp_charge, pairing, q, qi, Charge, LatticeVector, Species, Q};
use crate::linalg::{joint_kernel, Echelon};
use crate::n4::{self, build_generators};
use crate::report::VerificationReport;
use crate::scalar::Scalar;
use crate::space::partitions;
use crate::state::{FockMonomial, State};
use crate::vertex::{generated_subspace, lambda_bracket, mode_action, product, translate, Generated};
use crate::zhu::ZhuContext;

use Species::*;

pub fn level() -> Scalar {
    Scalar::frac(-3, 2)
}

#[derive(Clone, Debug)]
pub struct A2Generators {
    pub e_theta: State,
    pub f_theta: State,
    pub e1: State,
    pub f1: State,
    pub e2: State,
    pub f2: State,
    pub h1: State,
    pub h2: State,
    pub level: Scalar,
    pub omega: State,
}

/// Report names in the order of [`A2Generators::list`].
pub const NAMES: [&str; 8] = ["e_theta", "f_theta", "e_a1", "f_a1", "e_a2", "f_a2", "h_a1", "h_a2"];

impl A2Generators {
    pub fn list(&self) -> Vec<(&'static str, State)> {
        let s = [&self.e_theta, &self.f_theta, &self.e1, &self.f1, &self.e2, &self.f2, &self.h1, &self.h2];
        NAMES.iter().copied().zip(s.into_iter().cloned()).collect()
    }

    pub fn currents(&self) -> Vec<State> {
        self.list().into_iter().map(|(_, s)| s).collect()
    }

    pub fn get(&self, name: &str) -> State {
        self.list().into_iter().find(|(n, _)| *n == name).map(|(_, s)| s).expect("generator name")
    }
}

/// Multiplies every monomial by `e^{mφ}` (the tensor factor of F₋₁).
pub fn with_phi(s: &State, m: Q) -> State {
    let shift = LatticeVector::phi().scale(m);
    let mut out = State::zero();
    for (mono, c) in s.terms() {
        let mut mm = mono.clone();
        mm.exponent = mm.exponent + shift;
        out.add_term(mm, c.clone());
    }
    out
}

fn heis_h(d: Q, b: Q, p: Q) -> State {
    State::heis_vec(&LatticeVector::new(Q::zero(), b, d, p), 1)
}

/// ω − ½φ(−1)²1.
pub fn omega_a2() -> State {
    let mut w = n4::omega();
    w.add_term(FockMonomial::new(LatticeVector::ZERO, &[(Phi, 1), (Phi, 1)]), Scalar::frac(-1, 2));
    w
}

pub fn build_a2() -> A2Generators {
    let g = build_generators();
    let r = Scalar::inv_sqrt2();
    A2Generators {
        e_theta: g.e.clone(),
        f_theta: g.f.clone(),
        e1: with_phi(&g.tau_plus, qi(1)).scaled(&r),
        f1: with_phi(&g.taubar_minus, qi(-1)).scaled(&r),
        e2: with_phi(&g.taubar_plus, qi(-1)).scaled(&r),
        f2: with_phi(&g.tau_minus, qi(1)).scaled(&r),
        h1: heis_h(q(1, 2), qi(-1), q(-3, 2)),
        h2: heis_h(q(1, 2), qi(-1), q(3, 2)),
        level: level(),
        omega: omega_a2(),
    }
}

/// 3×3 integer matrices; the oracle for sl₃ structure constants.
type Mat3 = [[i64; 3]; 3];

fn unit(i: usize, j: usize) -> Mat3 {
    let mut m = [[0; 3]; 3];
    m[i][j] = 1;
    m
}

fn mat_of(name: &str) -> Mat3 {
    let mut m = match name {
        "e_theta" => unit(0, 2),
        "f_theta" => unit(2, 0),
        "e_a1" => unit(0, 1),
        "f_a1" => unit(1, 0),
        "e_a2" => unit(1, 2),
        "f_a2" => unit(2, 1),
        _ => [[0; 3]; 3],
    };
    match name {
        "h_a1" => {
            m[0][0] = 1;
            m[1][1] = -1;
        }
        "h_a2" => {
            m[1][1] = 1;
            m[2][2] = -1;
        }
        _ => {}
    }
    m
}

fn mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn commutator(a: &Mat3, b: &Mat3) -> Mat3 {
    let (x, y) = (mul(a, b), mul(b, a));
    let mut c = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = x[i][j] - y[i][j];
        }
    }
    c
}

/// The current realizing a traceless matrix.
fn current_of(g: &A2Generators, m: &Mat3) -> State {
    let mut out = State::zero();
    let off = [((0, 2), "e_theta"), ((2, 0), "f_theta"), ((0, 1), "e_a1"), ((1, 0), "f_a1"), ((1, 2), "e_a2"), ((2, 1), "f_a2")];
    for ((i, j), n) in off {
        if m[i][j] != 0 {
            out.add_scaled(&g.get(n), &Scalar::int(m[i][j]));
        }
    }
    // diag(a, b, c) = a·h1 + (a+b)·h2
    let (a, b) = (m[0][0], m[1][1]);
    out.add_scaled(&g.h1, &Scalar::int(a));
    out.add_scaled(&g.h2, &Scalar::int(a + b));
    out
}

fn trace(m: &Mat3) -> i64 {
    (0..3).map(|i| m[i][i]).sum()
}

/// Expected `[x_λ y] = [x,y] + λ k tr(xy)` from the matrix model.
pub fn expected_bracket(g: &A2Generators, x: &str, y: &str) -> BTreeMap<u32, State> {
    let (a, b) = (mat_of(x), mat_of(y));
    let mut out = BTreeMap::new();
    let c0 = current_of(g, &commutator(&a, &b));
    if !c0.is_zero() {
        out.insert(0, c0);
    }
    let t = trace(&mul(&a, &b));
    if t != 0 {
        out.insert(1, State::vacuum().scaled(&(&g.level * &Scalar::int(t))));
    }
    out
}

/// Zero-mode identities displayed in the proof of the homomorphism.
pub fn zero_mode_identities(g: &A2Generators) -> Vec<(&'static str, State, State)> {
    let z = |a: &State, b: &State| product(a, 0, b).expect("integral");
    vec![
        ("e_a1(0)f_a2 = 0", z(&g.e1, &g.f2), State::zero()),
        ("e_a2(0)f_a1 = 0", z(&g.e2, &g.f1), State::zero()),
        ("e_a1(0)e_a2 = e_theta", z(&g.e1, &g.e2), g.e_theta.clone()),
        ("f_a1(0)f_a2 = -f_theta", z(&g.f1, &g.f2), g.f_theta.neg()),
        ("e(0)f_a1 = -e_a2", z(&g.e_theta, &g.f1), g.e2.neg()),
        ("e(0)f_a2 = e_a1", z(&g.e_theta, &g.f2), g.e1.clone()),
        ("f(0)e_a1 = f_a2", z(&g.f_theta, &g.e1), g.f2.clone()),
        ("f(0)e_a2 = -f_a1", z(&g.f_theta, &g.e2), g.f1.neg()),
    ]
}

/// All 64 λ-brackets, the displayed zero-mode identities, the Sugawara
/// vector and the charge-0 condition.
pub fn verify_a2_relations() -> VerificationReport {
    let g = build_a2();
    let mut r = VerificationReport::new("a2-relations").with_config("level", "-3/2");
    for (x, a) in g.list() {
        for (y, b) in g.list() {
            let got: BTreeMap<u32, State> = lambda_bracket(&a, &b).entries.into_iter().filter(|(_, s)| !s.is_zero()).collect();
            let want = expected_bracket(&g, x, y);
            let ok = got == want;
            r.check(&format!("[{x}_λ {y}]"), "sl3 at level -3/2", ok, None);
            if !ok {
                let got_j: BTreeMap<String, serde_json::Value> = got.iter().map(|(k, v)| (k.to_string(), v.to_json())).collect();
                r.attach_witness(json!({ "got": got_j }));
            }
        }
    }
    for (id, got, want) in zero_mode_identities(&g) {
        r.check_eq(id, "zero-mode identities", &got, &want);
    }
    let w = &g.omega;
    r.check_eq("omega_a2 + 1/2 phi(-1)^2 = omega", "Sugawara vector", &with_phi_square(w), &n4::omega());
    let c = product(w, 3, w).expect("integral");
    r.check_eq("omega_a2 (3) omega_a2 = -4", "Sugawara central charge -8", &c, &State::vacuum().scaled(&Scalar::int(-4)));
    for (x, a) in g.list() {
        let ok0 = product(w, 0, &a).map(|s| s == translate(&a)).unwrap_or(false);
        let ok1 = product(w, 1, &a).map(|s| s == a).unwrap_or(false);
        let ok2 = (2..4).all(|n| product(w, n, &a).map(|s| s.is_zero()).unwrap_or(false));
        r.check(&format!("{x} is primary of weight 1"), "Sugawara consistency", ok0 && ok1 && ok2, None);
        let dp = LatticeVector::delta() + LatticeVector::phi();
        let charge_zero = a.terms().all(|(m, _)| pairing(&dp, &m.exponent).is_zero());
        r.check(&format!("(delta+phi)(0) {x} = 0"), "charge-0 slice", charge_zero, None);
    }
    r
}

fn with_phi_square(w: &State) -> State {
    let mut out = w.clone();
    out.add_term(FockMonomial::new(LatticeVector::ZERO, &[(Phi, 1), (Phi, 1)]), Scalar::frac(1, 2));
    out
}

/// The A₂ vertex subalgebra generated by the eight currents, spanned by
/// the ordered monomials x₁(−n₁)⋯x_k(−n_k)1 (PBW for affine currents).
pub fn generate_a2(max_weight: Q) -> Result<Generated> {
    if max_weight.is_negative() || !max_weight.is_integer() {
        return Err(Error::Precondition(format!("cutoff {max_weight} is not a non-negative integer")));
    }
    let gens = build_a2().currents();
    let mut out = Generated { max_weight, blocks: BTreeMap::new() };
    out.blocks.entry((Q::zero(), Charge::default())).or_default().insert(&State::vacuum(), 0);
    // Depth-first over non-increasing (mode, generator) sequences; the
    // partial product is shared by every extension.
    let mut stack: Vec<(State, u32, usize, (u32, usize))> = vec![(State::vacuum(), 0, 0, (u32::MAX, usize::MAX))];
    let top = max_weight.to_integer() as u32;
    while let Some((v, w, _, last)) = stack.pop() {
        for n in 1..=(top - w).min(last.0) {
            for (k, g) in gens.iter().enumerate() {
                if (n, k) > last {
                    continue;
                }
                let next = mode_action(g, qi(-(n as i64)), &v)?;
                if next.is_zero() {
                    continue;
                }
                let key = (qi((w + n) as i64), next.charge()?);
                out.blocks.entry(key).or_default().insert(&next, 0);
                stack.push((next, w + n, k, (n, k)));
            }
        }
    }
    Ok(out)
}

/// The same subalgebra by closure under all modes; a slower cross-check.
pub fn generate_a2_closure(max_weight: Q) -> Result<Generated> {
    generated_subspace(&build_a2().currents(), &[State::vacuum()], max_weight)
}

/// `[e_θ]([ω_{A2}] + ½) = 0` in Zhu's algebra of the generated subalgebra.
pub fn verify_zhu_a2(weight_cutoff: Q) -> Result<VerificationReport> {
    if weight_cutoff < qi(3) {
        return Err(Error::Precondition("the A2 Zhu relation needs a weight cutoff of at least 3".into()));
    }
    let g = build_a2();
    let ctx = ZhuContext::with_algebra(Q::zero(), generate_a2(weight_cutoff)?);
    let mut r = VerificationReport::new("a2-zhu").with_config("weight_cutoff", weight_cutoff);
    let e1e2 = ctx.circ(&g.e1, &g.e2)?;
    r.check("e_a1 o e_a2 lies in O", "circle product", ctx.algebra.contains(&e1e2) && !e1e2.is_zero(), None);
    r.attach_witness(json!({ "e_a1_circ_e_a2": e1e2.to_json() }));
    let mut x = ctx.star(&g.e_theta, &g.omega)?;
    x.add_scaled(&g.e_theta, &Scalar::frac(1, 2));
    let m = ctx.o_span_membership(&x)?;
    let replay = ctx.evaluate_witness(&m.witness)?;
    r.check("[e_theta]([omega_a2] + 1/2) = 0", "Zhu relation", m.member && replay == x, Some(format!("{} circle products examined", m.pairs_examined)));
    r.attach_witness(serde_json::to_value(&m.witness).unwrap_or_default());
    let mut control = ctx.star(&g.e_theta, &g.omega)?;
    control.add_scaled(&g.e_theta, &Scalar::frac(-1, 2));
    let mc = ctx.o_span_membership(&control)?;
    r.check("[e_theta]([omega_a2] - 1/2) is not in O", "negative control", !mc.member, None);
    Ok(r)
}

/// 𝓛ₛ(U) = ⊕ᵢ Uⁱ ⊗ F₋₁^{−s+i+μ}, with Uⁱ the δ(0) = i + offset piece.
#[derive(Clone, Debug)]
pub struct LsModule {
    /// `None` is V itself, viewed inside M ⊗ F.
    pub base: Option<ModuleDescriptor>,
    pub s: i64,
    pub mu: Q,
    pub offset: Q,
}

pub fn build_ls(base: Option<ModuleDescriptor>, s: i64) -> Result<LsModule> {
    let Some(d) = base else {
        return Ok(LsModule { base: None, s, mu: Q::zero(), offset: Q::zero() });
    };
    match d.kind {
        ModuleKind::Relaxed | ModuleKind::SpectralFlow | ModuleKind::TwistedFock => {}
        k => return Err(Error::Unsupported(format!("{k:?} carries no δ(0)-grading for 𝓛ₛ"))),
    }
    let mu = d.twist_mu;
    let offset = mu - Q::one();
    let d0 = d.space.shift.coord(Delta);
    let lattice_ok = d.space.sublattice.iter().all(|v| v.coord(Delta).is_integer());
    if !(d0 - offset).is_integer() || !lattice_ok {
        return Err(Error::Precondition(format!("δ(0) spectrum of {} is not in {} + ℤ", d.space.label, offset)));
    }
    Ok(LsModule { base: Some(d), s, mu, offset })
}

impl LsModule {
    /// φ-exponent paired with a given δ(0)-charge.
    pub fn phi_exponent(&self, delta0: Q) -> Q {
        delta0 - self.offset - qi(self.s) + self.mu
    }

    /// Attaches the F₋₁ factor to a state of U.
    pub fn lift(&self, u: &State) -> State {
        let mut out = State::zero();
        for (m, c) in u.terms() {
            let mut mm = m.clone();
            mm.exponent = mm.exponent + LatticeVector::phi().scale(self.phi_exponent(m.exponent.coord(Delta)));
            out.add_term(mm, c.clone());
        }
        out
    }

    pub fn contains(&self, s: &State) -> bool {
        let mut stripped = State::zero();
        for (m, c) in s.terms() {
            let e = m.exponent;
            if e.coord(Phi) != self.phi_exponent(e.coord(Delta)) {
                return false;
            }
            let modes: Vec<(Species, u32)> = m.modes_iter().filter(|(sp, _)| *sp != Phi).collect();
            let mut ex = e;
            ex.0[Phi.index()] = Q::zero();
            stripped.add_term(FockMonomial::new(ex, &modes), c.clone());
        }
        match &self.base {
            Some(d) => crate::amodules::build_module(d.clone()).contains(&stripped),
            None => {
                let sp = n4::pi0_f_space();
                stripped.terms().all(|(m, _)| sp.check_state(&State::monomial(m.clone())).is_ok()) && n4::screen_alpha(&stripped).is_zero()
            }
        }
    }
}

/// Exponent β−δ+(−r−1−i)(α+β)+(μ+j)(δ+φ) of E_{i,j}.
pub fn e_ij_exponent(r: Q, mu: Q, i: i64, j: i64) -> LatticeVector {
    let ab = LatticeVector::alpha() + LatticeVector::beta();
    let dp = LatticeVector::delta() + LatticeVector::phi();
    LatticeVector::beta() - LatticeVector::delta() + ab.scale(-r - Q::one() - qi(i)) + dp.scale(mu + qi(j))
}

/// E_{i,j} = (−1)^{i+j} e^{…}; the sign absorbs the cocycle, as for E_i.
pub fn e_ij(r: Q, mu: Q, i: i64, j: i64) -> State {
    let s = if (i + j).rem_euclid(2) == 0 { 1 } else { -1 };
    State::exp(e_ij_exponent(r, mu, i, j)).scaled(&Scalar::int(s))
}

/// The four displayed actions: (operator, Δi, Δj, coefficient).
pub fn eij_expected(r: Q, mu: Q, i: i64, j: i64) -> [(&'static str, i64, i64, Scalar); 4] {
    let s = Scalar::inv_sqrt2();
    let sc = |x: Q| Scalar::frac(*x.numer(), *x.denom());
    let t = Q::one() - mu * 2 - qi(2 * j);
    [
        ("e_a1", 0, 1, s.clone()),
        ("e_a2", -1, -1, &s * &sc(t)),
        ("f_a1", 0, -1, -(&(&s * &sc(t)) * &sc(r + qi(i) - mu - qi(j) + Q::one()))),
        ("f_a2", 1, 1, &s * &sc(r + qi(i) + Q::one())),
    ]
}

/// One nonzero entry `op(0) E_{i,j} = coefficient · E_{target}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EijEntry {
    pub op: &'static str,
    pub source: (i64, i64),
    pub target: (i64, i64),
    pub coefficient: Scalar,
}

/// The computed zero-mode matrices on E_{i,j}, |i|, |j| ≤ window, read off
/// in the basis extended by one step in each direction.
pub fn eij_matrices(r: Q, mu: Q, window: i64) -> Result<Vec<EijEntry>> {
    let g = build_a2();
    let mut out = Vec::new();
    for op in ["e_a1", "e_a2", "f_a1", "f_a2", "h_a1", "h_a2"] {
        for i in -window..=window {
            for j in -window..=window {
                let mut img = mode_action(&g.get(op), Q::zero(), &e_ij(r, mu, i, j))?;
                for ti in i - 1..=i + 1 {
                    for tj in j - 1..=j + 1 {
                        let t = e_ij(r, mu, ti, tj);
                        let (m, sign) = t.leading().map(|(m, c)| (m.clone(), c.clone())).expect("monomial");
                        let c = &img.coeff(&m) * &sign;
                        if !c.is_zero() {
                            img.add_scaled(&t, &-&c);
                            out.push(EijEntry { op, source: (i, j), target: (ti, tj), coefficient: c });
                        }
                    }
                }
                if !img.is_zero() {
                    return Err(Error::NotInSpace(format!("{op}(0) E_{{{i},{j}}}"), "span of E_{i,j}".into()));
                }
            }
        }
    }
    Ok(out)
}

/// Zero-mode matrices of e_{α1}, e_{α2}, f_{α1}, f_{α2} on E_{i,j} for
/// |i|, |j| ≤ window, and the sl₃ zero-mode relations among them.
pub fn verify_eij(r: Q, mu: Q, window: i64) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("a2-eij").with_config("r", r).with_config("mu", mu).with_config("window", window);
    if r.is_integer() || (mu - q(1, 2)).is_integer() || (r - mu).is_integer() {
        return Err(Error::Precondition("E_{i,j} needs r ∉ ℤ, μ ∉ ½+ℤ, r−μ ∉ ℤ".into()));
    }
    rep.notes.push("μ is sampled in ℚ; complex μ is not representable".into());
    let g = build_a2();
    let ls = build_ls(Some(ModuleDescriptor::spectral_flow(r, mu)), 0)?;
    let mut mismatches = Vec::new();
    let mut outside = 0;
    for i in -window..=window {
        for j in -window..=window {
            let v = e_ij(r, mu, i, j);
            if !ls.contains(&v) {
                outside += 1;
            }
            for (op, di, dj, c) in eij_expected(r, mu, i, j) {
                let got = mode_action(&g.get(op), Q::zero(), &v)?;
                let want = e_ij(r, mu, i + di, j + dj).scaled(&c);
                if got != want {
                    mismatches.push(json!({ "op": op, "i": i, "j": j, "got": got.to_json(), "want": want.to_json() }));
                }
            }
        }
    }
    rep.check("E_{i,j} lie in L_0(M^mu(r))", "lowest component", outside == 0, None);
    let n = mismatches.len();
    rep.check("displayed zero-mode actions on E_{i,j}", "E_{i,j} formulas", n == 0, Some(format!("{n} mismatches")));
    if n > 0 {
        mismatches.truncate(8);
        rep.attach_witness(json!(mismatches));
    }
    // [x(0), y(0)] = [x,y](0) on the inner window.
    let mut bad = 0;
    let inner = (window - 1).max(0);
    for (_, a) in g.list() {
        for (_, b) in g.list() {
            let xy = product(&a, 0, &b)?;
            for i in -inner..=inner {
                for j in -inner..=inner {
                    let v = e_ij(r, mu, i, j);
                    let lhs = mode_action(&a, Q::zero(), &mode_action(&b, Q::zero(), &v)?)?
                        .minus(&mode_action(&b, Q::zero(), &mode_action(&a, Q::zero(), &v)?)?);
                    if lhs != mode_action(&xy, Q::zero(), &v)? {
                        bad += 1;
                    }
                }
            }
        }
    }
    rep.check("sl3 zero-mode relations on E_{i,j}", "zero-mode closure", bad == 0, Some(format!("{bad} failures")));
    Ok(rep)
}

/// The displayed vectors: (label, exponent, expected (h_{α1}(0), h_{α2}(0))).
pub fn category_o_vectors() -> Vec<(&'static str, LatticeVector, (Q, Q))> {
    let half = q(1, 2);
    vec![
        ("1", LatticeVector::ZERO, (Q::zero(), Q::zero())),
        ("e^{-delta}", -LatticeVector::delta(), (-half, -half)),
        ("e^{-beta+delta/2-phi/2}", LatticeVector::new(Q::zero(), qi(-1), half, -half), (q(-3, 2), Q::zero())),
        ("e^{-beta+delta/2+phi/2}", LatticeVector::new(Q::zero(), qi(-1), half, half), (Q::zero(), q(-3, 2))),
    ]
}

/// e^{−½(α+β)}: same h-weights and conformal weight as e^{−δ}, and a
/// genuine highest-weight vector. e_{α1}(0)e^{−δ} = −(1/√2)e^{φ} ≠ 0.
pub fn corrected_vector() -> (&'static str, LatticeVector, (Q, Q)) {
    let half = q(1, 2);
    ("e^{-(alpha+beta)/2}", (LatticeVector::alpha() + LatticeVector::beta()).scale(-half), (-half, -half))
}

/// Highest-weight conditions for the displayed vectors and the corrected one.
pub fn verify_category_o_vectors() -> Result<VerificationReport> {
    let g = build_a2();
    let mut rep = VerificationReport::new("a2-category-o");
    rep.notes.push("e^{-delta} is not annihilated by e_a1(0); e^{-(alpha+beta)/2} is checked alongside".into());
    for (label, ex, (l1, l2)) in category_o_vectors().into_iter().chain([corrected_vector()]) {
        let v = State::exp(ex);
        let mut killed = true;
        for (_, a) in g.list() {
            for n in 1..=3 {
                killed &= mode_action(&a, qi(n), &v)?.is_zero();
            }
        }
        rep.check(&format!("{label}: positive modes annihilate"), "category O vectors", killed, None);
        let raising = [&g.e_theta, &g.e1, &g.e2].iter().all(|a| mode_action(a, Q::zero(), &v).map(|s| s.is_zero()).unwrap_or(false));
        rep.check(&format!("{label}: e_theta(0), e_a1(0), e_a2(0) annihilate"), "category O vectors", raising, None);
        let sc = |x: Q| Scalar::frac(*x.numer(), *x.denom());
        let ok1 = mode_action(&g.h1, Q::zero(), &v)? == v.scaled(&sc(l1));
        let ok2 = mode_action(&g.h2, Q::zero(), &v)? == v.scaled(&sc(l2));
        rep.check(&format!("{label}: (h_a1(0), h_a2(0)) = ({l1}, {l2})"), "category O vectors", ok1 && ok2, None);
    }
    Ok(rep)
}

/// γ₁ = −2α, γ₂ = α + β − 2δ.
pub fn gammas() -> [LatticeVector; 2] {
    [LatticeVector::alpha().scale(qi(-2)), LatticeVector::alpha() + LatticeVector::beta() - LatticeVector::delta().scale(qi(2))]
}

fn create_vec(s: &State, v: &LatticeVector, n: u32) -> State {
    let mut out = State::zero();
    for sp in Species::ALL {
        let c = v.coord(sp);
        if !c.is_zero() {
            out.add_scaled(&s.create(sp, n), &Scalar::frac(*c.numer(), *c.denom()));
        }
    }
    out
}

/// Basis of the Heisenberg Fock space on γ₁, γ₂ at a given degree.
pub fn gamma_fock_block(deg: u32) -> Vec<State> {
    let gs = gammas();
    partitions(&[Alpha, Beta], deg)
        .into_iter()
        .map(|modes| {
            let mut s = State::vacuum();
            for k in modes.iter() {
                let (sp, n) = crate::state::unpack(*k);
                s = create_vec(&s, &gs[sp.index()], n);
            }
            s
        })
        .collect()
}

/// ω_h = −(1/9)(2h₁² + 2h₁h₂ + 2h₂²), the Sugawara vector of the Cartan
/// Heisenberg at level −3/2, and ω₂₃ = ω_{A2} − ω_h.
pub fn coset_virasoro() -> State {
    let g = build_a2();
    let h = |a: &State, b: &State| product(a, -1, b).expect("integral");
    let mut wh = State::zero();
    wh.add_scaled(&h(&g.h1, &g.h1), &Scalar::int(2));
    wh.add_scaled(&h(&g.h1, &g.h2), &Scalar::int(2));
    wh.add_scaled(&h(&g.h2, &g.h2), &Scalar::int(2));
    g.omega.minus(&wh.scaled(&Scalar::frac(-1, 9)))
}

/// Screening kernel on the γ Heisenberg against the Cartan commutant in
/// the generated A₂ subalgebra, weight by weight.
pub fn coset_dims(weight_cutoff: Q) -> Result<VerificationReport> {
    if weight_cutoff > qi(6) || weight_cutoff < Q::zero() || !weight_cutoff.is_integer() {
        return Err(Error::Precondition("coset cutoff must be an integer in [0, 6]".into()));
    }
    let top = weight_cutoff.to_integer() as u32;
    let g = build_a2();
    let alg = generate_a2(weight_cutoff)?;
    let mut rep = VerificationReport::new("a2-coset").with_config("weight_cutoff", weight_cutoff);
    let screen1 = |v: &State| n4::screen_alpha(v);
    let screen2 = |v: &State| n4::screen_qt(v);
    let mut dims = Vec::new();
    let mut commutants = BTreeMap::new();
    for w in 0..=top {
        let fock = gamma_fock_block(w);
        let ker = joint_kernel(&fock, &[&screen1, &screen2]);
        let block = alg.basis(qi(w as i64), Charge::default());
        let ops: Vec<Box<dyn Fn(&State) -> State>> = (0..=w as i64)
            .flat_map(|n| {
                let (a, b) = (g.h1.clone(), g.h2.clone());
                [
                    Box::new(move |v: &State| mode_action(&a, qi(n), v).expect("integral")) as Box<dyn Fn(&State) -> State>,
                    Box::new(move |v: &State| mode_action(&b, qi(n), v).expect("integral")),
                ]
            })
            .collect();
        let op_refs: Vec<&dyn Fn(&State) -> State> = ops.iter().map(|b| b.as_ref()).collect();
        let comm = joint_kernel(&block, &op_refs);
        let mut ech = Echelon::new();
        for k in &ker {
            ech.insert(k, 0);
        }
        let same = comm.len() == ker.len() && comm.iter().all(|c| ech.contains(c));
        rep.check(
            &format!("weight {w}: screening kernel = Cartan commutant"),
            "coset dimensions",
            same,
            Some(format!("kernel {} / commutant {}", ker.len(), comm.len())),
        );
        dims.push(json!({ "weight": w, "kernel": ker.len(), "commutant": comm.len(), "fock": fock.len() }));
        commutants.insert(w, comm);
    }
    rep.attach_witness(json!(dims));
    if top >= 2 {
        let w23 = coset_virasoro();
        let in_comm = commutants.get(&2).is_some_and(|c| {
            let mut e = Echelon::new();
            c.iter().for_each(|x| {
                e.insert(x, 0);
            });
            e.contains(&w23)
        });
        rep.check("omega_23 lies in the commutant", "coset Virasoro", in_comm, None);
        let p = |n| product(&w23, n, &w23).expect("integral");
        let vir = p(0) == translate(&w23) && p(1) == w23.scaled(&Scalar::int(2)) && p(2).is_zero();
        rep.check("omega_23 is a Virasoro vector", "coset Virasoro", vir, None);
        rep.check_eq("omega_23 (3) omega_23 = -5", "central charge -10", &p(3), &State::vacuum().scaled(&Scalar::int(-5)));
        if top >= 3 {
            let c3 = commutants.get(&3).cloned().unwrap_or_default();
            let l1 = |v: &State| product(&w23, 2, v).expect("integral");
            let l2 = |v: &State| product(&w23, 3, v).expect("integral");
            let prim = joint_kernel(&c3, &[&l1, &l2]);
            rep.check("weight-3 coset primary exists", "W(2,3)", prim.len() == 1, Some(format!("{} primaries", prim.len())));
            if let Some(w3) = prim.first() {
                rep.attach_witness(json!({ "W": w3.monic().to_json() }));
            }
        }
    }
    Ok(rep)
}

/// (V⊗F₋₁)^{(0)} against the generated subalgebra: block dimensions with
/// weight w and δ(0) = m where w + m²/2 stays within the V cutoff.
pub fn verify_simple_current(a2_cutoff: Q, v_cutoff: Q) -> Result<VerificationReport> {
    let alg = generate_a2(a2_cutoff)?;
    let v = n4::generate_v(v_cutoff);
    let mut rep = VerificationReport::new("a2-simple-current").with_config("a2_cutoff", a2_cutoff).with_config("v_cutoff", v_cutoff);
    let fock = |d: u32| partitions(&[Phi], d).len();
    let mut slice: BTreeMap<(Q, Charge), usize> = BTreeMap::new();
    for ((wv, cv), dim) in v.dims() {
        if !cv.phi0.is_zero() {
            continue;
        }
        let m = cv.delta0;
        let fexp = LatticeVector::phi().scale(m);
        let fc = exp_charge(&fexp);
        let base = wv - m * m / 2;
        let mut d = 0u32;
        while base + qi(d as i64) <= a2_cutoff {
            let w = base + qi(d as i64);
            if w + m * m / 2 <= v_cutoff {
                *slice.entry((w, cv + fc)).or_default() += dim * fock(d);
            }
            d += 1;
        }
    }
    let mut keys: Vec<(Q, Charge)> = slice.keys().copied().collect();
    keys.extend(alg.dims().keys().copied().filter(|(w, c)| *w + c.delta0 * c.delta0 / 2 <= v_cutoff));
    keys.sort();
    keys.dedup();
    let mut bad = Vec::new();
    for k in &keys {
        let (a, b) = (alg.dim(k.0, k.1), slice.get(k).copied().unwrap_or(0));
        if a != b {
            bad.push(json!({ "weight": k.0.to_string(), "charge": k.1, "generated": a, "slice": b }));
        }
    }
    rep.check("generated A2 = (V⊗F)^(0) blockwise", "simple current decomposition", bad.is_empty(), Some(format!("{} blocks compared", keys.len())));
    if !bad.is_empty() {
        rep.attach_witness(json!(bad));
    }
    Ok(rep)
}

/// Everything for `verify a2`.
pub fn a2_suite(r: Q, mu: Q, window: i64, zhu_cutoff: Q) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("a2");
    rep.absorb(verify_a2_relations());
    rep.absorb(verify_zhu_a2(zhu_cutoff)?);
    rep.absorb(verify_eij(r, mu, window)?);
    rep.absorb(verify_category_o_vectors()?);
    rep.absorb(verify_simple_current(qi(2), qi(4))?);
    Ok(rep)
}
