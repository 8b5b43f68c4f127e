//! Shared fixtures for unit tests.

use std::collections::{BTreeMap, BTreeSet};

use num::BigRational;

use crate::automaton::{Automaton, DataWord, WordStep};
use crate::logic::{Formula, Term, Variable};

pub fn xv() -> Variable {
    Variable::data("x")
}

pub fn yv() -> Variable {
    Variable::data("y")
}

pub fn xt() -> Term {
    Term::var(xv()).unwrap()
}

pub fn yt() -> Term {
    Term::var(yv()).unwrap()
}

pub fn xprev() -> Term {
    Term::var(xv().as_prev()).unwrap()
}

pub fn yprev() -> Term {
    Term::var(yv().as_prev()).unwrap()
}

pub fn st(name: &str) -> Formula {
    Formula::state(Variable::state(name)).unwrap()
}

/// The two-counter automaton used as the running example: `ι = q0`,
/// `F = {q3, q4}`, language empty.
pub fn lockstep_counters() -> Automaton {
    let mut rules = BTreeMap::new();
    rules.insert(
        (Variable::state("q0"), "a".to_string()),
        Formula::and(vec![
            st("q1"),
            st("q2"),
            Formula::eq(xt(), Term::int(0)),
            Formula::eq(yt(), Term::int(0)),
        ]),
    );
    rules.insert(
        (Variable::state("q1"), "a".to_string()),
        Formula::and(vec![
            st("q1"),
            st("q3"),
            Formula::eq(xt(), yprev() + Term::int(1)),
            Formula::eq(yt(), xprev() + Term::int(1)),
        ]),
    );
    rules.insert(
        (Variable::state("q1"), "b".to_string()),
        Formula::and(vec![st("q3"), Formula::ge(xprev(), yprev())]),
    );
    rules.insert(
        (Variable::state("q2"), "a".to_string()),
        Formula::and(vec![
            st("q2"),
            Formula::gt(xt(), xprev()),
            Formula::gt(yt(), yprev()),
        ]),
    );
    rules.insert(
        (Variable::state("q2"), "b".to_string()),
        Formula::and(vec![st("q4"), Formula::gt(xprev(), yprev())]),
    );
    Automaton::new(
        vec![xv(), yv()],
        (0..5).map(|i| Variable::state(&format!("q{}", i))).collect(),
        vec!["a".into(), "b".into()],
        st("q0"),
        BTreeSet::from([Variable::state("q3"), Variable::state("q4")]),
        rules,
    )
}

/// The nonempty variation: the `(q2, b)` rule relaxed from `>` to `>=`,
/// which lets `ab` through.
pub fn lockstep_counters_relaxed() -> Automaton {
    let a = lockstep_counters();
    let mut rules = BTreeMap::new();
    for e in a.events() {
        for q in a.states() {
            rules.insert((q.clone(), e.clone()), a.rule(q, e).unwrap().clone());
        }
    }
    rules.insert(
        (Variable::state("q2"), "b".to_string()),
        Formula::and(vec![st("q4"), Formula::ge(xprev(), yprev())]),
    );
    Automaton::new(
        a.vars().to_vec(),
        a.states().to_vec(),
        a.events().to_vec(),
        a.init().clone(),
        a.finals().clone(),
        rules,
    )
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn word(steps: &[(&str, i64, i64)]) -> DataWord {
    DataWord {
        steps: steps
            .iter()
            .map(|(e, x, y)| WordStep {
                event: e.to_string(),
                values: BTreeMap::from([(xv(), rat(*x)), (yv(), rat(*y))]),
            })
            .collect(),
    }
}
