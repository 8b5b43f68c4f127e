//! Terms, atoms and formulas of the combined boolean + linear rational
//! arithmetic theory, with substitution, time stamping, dualization and
//! ground evaluation.

mod eval;
mod formula;
mod subst;
mod term;
mod var;

pub use eval::{evaluate_ground, Valuation, Value};
pub use formula::{Atom, Formula, Kind, Pol, Rel};
pub use subst::{
    data_to_prev, dualize, fresh_var, rename_vars, rewrite_step, rewrite_unstamped,
    stamp_data, stamp_rule_data, stamp_states, substitute, unstamp, Image, Subst,
};
pub use term::Term;
pub use var::{Decor, Sort, Variable};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LogicError {
    #[error("variable {var} used where a {expected:?}-sorted value is required")]
    SortMismatch { var: String, expected: Sort },

    #[error("no binding for {0} in the valuation")]
    MissingBinding(String),

    #[error("state {0} occurs under an odd number of negations")]
    NotPositive(String),

    #[error("cannot evaluate a quantified formula")]
    QuantifiedEval,

    #[error("cannot dualize a quantified formula")]
    QuantifiedDual,

    #[error("variable {var} does not carry the expected stamp {expected}")]
    UnexpectedStamp {
        var: String,
        found: u32,
        expected: u32,
    },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfix::*;
    use num::BigRational;

    #[test]
    fn empty_substitution_is_identity() {
        let f = Formula::and(vec![st("q1"), Formula::gt(xt(), Term::int(0))]);
        assert_eq!(substitute(&f, &Subst::new()).unwrap(), f);
    }

    #[test]
    fn rewriting_the_initial_state_unfolds_the_first_rule() {
        let a = lockstep_counters();
        let rules = a.rules_for("a").unwrap();
        let got = rewrite_step(a.init(), rules, 0);
        let x1 = Term::var(xv().at(1)).unwrap();
        let y1 = Term::var(yv().at(1)).unwrap();
        let want = Formula::and(vec![
            st("q1"),
            st("q2"),
            Formula::eq(x1, Term::int(0)),
            Formula::eq(y1, Term::int(0)),
        ]);
        assert_eq!(got, want);
    }

    #[test]
    fn rewriting_top_changes_nothing() {
        let a = lockstep_counters();
        let rules = a.rules_for("a").unwrap();
        assert_eq!(rewrite_step(&Formula::tt(), rules, 3), Formula::tt());
    }

    #[test]
    fn rewriting_a_conjunction_fires_both_rules() {
        let a = lockstep_counters();
        let rules = a.rules_for("b").unwrap();
        let f = Formula::and(vec![st("q1"), st("q2")]);
        let got = rewrite_step(&f, rules, 1);
        let x1 = Term::var(xv().at(1)).unwrap();
        let y1 = Term::var(yv().at(1)).unwrap();
        let want = Formula::and(vec![
            Formula::and(vec![st("q3"), Formula::ge(x1.clone(), y1.clone())]),
            Formula::and(vec![st("q4"), Formula::gt(x1, y1)]),
        ]);
        assert_eq!(got, want);
    }

    #[test]
    fn substitution_agrees_with_evaluation_on_samples() {
        // (x >= y)[y+1/x] must evaluate like y+1 >= y everywhere
        let f = Formula::ge(xt(), yt());
        let mut map = Subst::new();
        map.insert(xv(), Image::Tm(yt() + Term::int(1)));
        let g = substitute(&f, &map).unwrap();
        let direct = Formula::ge(yt() + Term::int(1), yt());
        let mut state = 11u64;
        for _ in 0..20 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let n = (state >> 33) as i64 % 100 - 50;
            let mut nu = Valuation::new();
            nu.set_rat(yv(), BigRational::new(n.into(), ((state % 7) + 1).into()));
            assert_eq!(
                evaluate_ground(&g, &nu).unwrap(),
                evaluate_ground(&direct, &nu).unwrap()
            );
        }
    }

    #[test]
    fn capture_avoiding_substitution_renames_binders() {
        // (exists x . x <= y)[x/y] must not capture
        let inner = Formula::le(xt(), yt());
        let f = Formula::exists(vec![xv()], inner);
        let mut map = Subst::new();
        map.insert(yv(), Image::Tm(xt()));
        let g = substitute(&f, &map).unwrap();
        // result is exists x' . x' <= x; the free variable is exactly x
        assert_eq!(g.free_data().len(), 1);
        assert!(g.is_free(&xv()));
        match g.kind() {
            Kind::Exists(vs, body) => {
                assert_eq!(vs.len(), 1);
                assert_ne!(vs[0], xv());
                assert!(body.is_free(&vs[0]));
            }
            other => panic!("expected a quantifier, got {:?}", other),
        }
    }

    #[test]
    fn dualization_of_a_literal_conjunction() {
        let f = Formula::and(vec![st("q1"), Formula::gt(xt(), Term::int(0))]);
        let d = dualize(&f).unwrap();
        let want = Formula::or(vec![st("q1"), Formula::not(&Formula::gt(xt(), Term::int(0)))]);
        assert_eq!(d, want);
        assert_eq!(d.size(), f.size());
        assert_eq!(dualize(&d).unwrap(), f);
    }

    #[test]
    fn dualization_of_constants() {
        assert_eq!(dualize(&Formula::tt()).unwrap(), Formula::ff());
        assert_eq!(dualize(&Formula::ff()).unwrap(), Formula::tt());
    }

    #[test]
    fn dualization_rejects_negative_states_and_quantifiers() {
        let neg = Formula::not(&st("q1"));
        assert!(dualize(&neg).is_err());
        let ex = Formula::exists(vec![xv()], Formula::le(xt(), Term::int(0)));
        assert!(dualize(&ex).is_err());
    }

    #[test]
    fn ground_evaluation_examples() {
        let x2 = Variable::data("x").at(2);
        let y2 = Variable::data("y").at(2);
        let f = Formula::ge(Term::var(x2.clone()).unwrap(), Term::var(y2.clone()).unwrap());
        let mut nu = Valuation::new();
        nu.set_rat(x2, rat(2));
        nu.set_rat(y2, rat(1));
        assert!(evaluate_ground(&f, &nu).unwrap());
        assert!(!evaluate_ground(&Formula::ff(), &nu).unwrap());
        // missing binding is an error
        let g = Formula::le(xt(), Term::int(0));
        assert!(matches!(
            evaluate_ground(&g, &Valuation::new()),
            Err(LogicError::MissingBinding(_))
        ));
    }

    #[test]
    fn full_run_formula_of_the_sample_word_evaluates_false() {
        // unfold the example automaton over a, a, b and evaluate under the
        // word (0,0) (1,1) (2,1) with the final states true
        let a = lockstep_counters();
        let mut phi = a.init().clone();
        for (k, e) in ["a", "a", "b"].iter().enumerate() {
            phi = rewrite_step(&phi, a.rules_for(e).unwrap(), k as u32);
        }
        let mut nu = Valuation::new();
        for q in a.states() {
            nu.set_bool(q.clone(), a.is_final(q));
        }
        for (k, (x, y)) in [(0, 0), (1, 1), (2, 1)].iter().enumerate() {
            nu.set_rat(xv().at(k as u32 + 1), rat(*x));
            nu.set_rat(yv().at(k as u32 + 1), rat(*y));
        }
        // no step-0 variables remain free in this unfolding
        assert!(phi.free_data().iter().all(|v| v.stamp() != Some(0)));
        assert!(!evaluate_ground(&phi, &nu).unwrap());
    }

    #[test]
    fn size_counts_connectives_and_literals() {
        assert_eq!(Formula::tt().size(), 1);
        let f = Formula::and(vec![st("q1"), Formula::gt(xt(), Term::int(0))]);
        // q1 (1) + atom (1 var + 1) + one connective
        assert_eq!(f.size(), 4);
        assert_eq!(Formula::not(&Formula::gt(xt(), Term::int(0))).size(), 2);
    }

    #[test]
    fn free_variable_bookkeeping_after_substitution() {
        let f = Formula::and(vec![st("q1"), Formula::le(xt(), yt())]);
        let mut map = Subst::new();
        map.insert(xv(), Image::Tm(Term::int(3)));
        map.insert(
            Variable::state("q1"),
            Image::Fm(st("q9")),
        );
        let g = substitute(&f, &map).unwrap();
        assert!(!g.is_free(&xv()));
        assert!(g.is_free(&yv()));
        assert!(!g.is_free(&Variable::state("q1")));
        assert!(g.is_free(&Variable::state("q9")));
    }

    #[test]
    fn atoms_normalize_to_canonical_shape() {
        // x >= 5 and 5 <= x intern to the same node
        let a1 = Formula::ge(xt(), Term::int(5));
        let a2 = Formula::le(Term::int(5), xt());
        assert_eq!(a1, a2);
        // ground atoms fold
        assert_eq!(Formula::le(Term::int(0), Term::int(5)), Formula::tt());
        assert_eq!(Formula::lt(xt(), xt()), Formula::ff());
        // equality stored with leading coefficient one
        let e1 = Formula::eq(xt() + xt(), Term::int(4));
        let e2 = Formula::eq(xt(), Term::int(2));
        assert_eq!(e1, e2);
    }

    #[test]
    fn rewrite_preserves_positive_membership() {
        let a = lockstep_counters();
        let f = Formula::and(vec![st("q1"), st("q2")]);
        for e in a.events() {
            let g = rewrite_step(&f, a.rules_for(e).unwrap(), 0);
            assert!(g.is_positive());
        }
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }
}
