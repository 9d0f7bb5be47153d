use voalab_core::lattice::{q, qi, LatticeVector, Species};
use voalab_core::scalar::Scalar;
use voalab_core::state::{FockMonomial, State};
use voalab_core::vertex::{lambda_bracket, mode_action, product, translate};

use Species::*;

fn e() -> State {
    State::exp(LatticeVector::ints(1, 1, 0, 0))
}

fn h() -> State {
    State::heis(Beta, 1).scaled(&Scalar::int(-2)).plus(&State::heis(Delta, 1))
}

fn f() -> State {
    let g = LatticeVector::ints(-1, -1, 0, 0);
    let mut s = State::zero();
    s.add_term(FockMonomial::new(g, &[(Alpha, 1), (Alpha, 1)]), Scalar::frac(-1, 2));
    s.add_term(FockMonomial::new(g, &[(Alpha, 2)]), Scalar::frac(1, 2));
    s.add_term(FockMonomial::new(g, &[(Alpha, 1), (Delta, 1)]), Scalar::int(-1));
    s.add_term(FockMonomial::new(g, &[(Alpha, 1), (Beta, 1)]), Scalar::frac(1, 2));
    s
}

#[test]
fn sl2_brackets() {
    let r = lambda_bracket(&e(), &f());
    assert_eq!(r.get(0), h());
    assert_eq!(r.get(1), State::vacuum().scaled(&Scalar::frac(-3, 2)));
    assert_eq!(r.entries.len(), 2);
    let r = lambda_bracket(&h(), &h());
    assert_eq!(r.entries.len(), 1);
    assert_eq!(r.get(1), State::vacuum().scaled(&Scalar::int(-3)));
    assert_eq!(mode_action(&e(), qi(0), &f()).unwrap(), h());
}

#[test]
fn f_on_psi() {
    let d = State::exp(LatticeVector::delta());
    let got = product(&f(), 0, &d).unwrap();
    let want = State::monomial(FockMonomial::new(LatticeVector::ints(-1, -1, 1, 0), &[(Alpha, 1)])).neg();
    assert_eq!(got, want);
    let ff = product(&f(), 0, &got).unwrap();
    assert!(ff.is_zero(), "{ff}");
}

#[test]
fn screening_on_psi() {
    let qv = State::exp(LatticeVector::ints(1, 1, -2, 0));
    let got = mode_action(&qv, qi(0), &State::exp(LatticeVector::delta())).unwrap();
    let g = LatticeVector::ints(1, 1, -1, 0);
    let mut want = State::zero();
    want.add_term(FockMonomial::new(g, &[(Alpha, 1)]), Scalar::one());
    want.add_term(FockMonomial::new(g, &[(Beta, 1)]), Scalar::one());
    want.add_term(FockMonomial::new(g, &[(Delta, 1)]), Scalar::int(-2));
    assert_eq!(got, want);
    let qt = State::exp(LatticeVector::new(q(-1, 2), q(-1, 2), qi(1), qi(0)));
    assert!(mode_action(&qt, qi(0), &e()).unwrap().is_zero());
    assert!(mode_action(&qt, qi(0), &f()).unwrap().is_zero());
    assert!(mode_action(&qt, qi(0), &h()).unwrap().is_zero());
}

#[test]
fn translation_of_exponential() {
    let d = State::exp(LatticeVector::delta());
    assert_eq!(translate(&d), d.create(Delta, 1));
    assert!(translate(&State::vacuum()).is_zero());
}
