//! Solver properties against the independent expansion-based oracle, plus
//! model soundness and the two interpolation strategies cross-checked.

mod common;

use ada_core::logic::{evaluate_ground, rewrite_unstamped, Formula, Term, Variable};
use ada_core::smt::{
    stamp_both, InterpolationStrategy, SatResult, Solver, SolverConfig,
};
use ada_core::symbolic::build_theta;

use common::gen;
use common::oracle::oracle_sat;

fn vars3() -> (Vec<Term>, Vec<Variable>) {
    let data: Vec<Term> = ["x", "y", "z", "w"]
        .iter()
        .map(|n| Term::var(Variable::data(n)).unwrap())
        .collect();
    let bools: Vec<Variable> = ["p", "q", "r"].iter().map(|n| Variable::state(n)).collect();
    (data, bools)
}

#[test]
fn verdicts_agree_with_the_expansion_oracle() {
    let (data, bools) = vars3();
    let mut r = gen::rng(0xada0);
    let mut solver = Solver::default();
    let mut sat_count = 0;
    for i in 0..150 {
        let f = gen::rand_formula(&mut r, &data, &bools, 3);
        let expected = oracle_sat(&f);
        let got = solver.check_sat(&f).unwrap().is_sat();
        assert_eq!(got, expected, "case {}: {}", i, f);
        if expected {
            sat_count += 1;
        }
    }
    assert!(sat_count > 20, "generator too skewed: {} sat", sat_count);
}

#[test]
fn models_reevaluate_to_true() {
    let (data, bools) = vars3();
    let mut r = gen::rng(0xada1);
    let mut solver = Solver::default();
    for _ in 0..150 {
        let f = gen::rand_formula(&mut r, &data, &bools, 3);
        if let SatResult::Sat(model) = solver.check_sat(&f).unwrap() {
            assert!(evaluate_ground(&f, &model).unwrap(), "model fails on {}", f);
        }
    }
}

#[test]
fn entailment_memo_is_consistent() {
    let (data, bools) = vars3();
    let mut r = gen::rng(0xada2);
    let mut solver = Solver::default();
    for _ in 0..60 {
        let a = gen::rand_formula(&mut r, &data, &bools, 2);
        let b = gen::rand_formula(&mut r, &data, &bools, 2);
        let first = solver.entails(&a, &b).unwrap();
        let again = solver.entails(&a, &b).unwrap();
        assert_eq!(first, again);
        assert_eq!(first, common::oracle::oracle_entails(&a, &b));
    }
    assert!(solver.stats.memo_hits >= 30);
}

#[test]
fn both_interpolation_strategies_satisfy_the_contract() {
    // unfoldings of spurious prefixes on a corpus automaton give realistic
    // interpolation problems; the contract re-check is enabled on both
    // strategies
    let a = common::load_corpus_automaton("fig1.ada");
    let words: Vec<Vec<String>> = vec![
        vec!["a".into()],
        vec!["a".into(), "a".into()],
        vec!["a".into(), "b".into()],
        vec!["a".into(), "a".into(), "b".into()],
        vec!["a".into(), "a".into(), "a".into(), "b".into()],
    ];
    for strategy in [InterpolationStrategy::Proof, InterpolationStrategy::ExactPost] {
        let mut solver = Solver::new(SolverConfig {
            strategy,
            verify_interpolants: true,
            ..SolverConfig::default()
        });
        for events in &words {
            let up = build_theta(&a, events).unwrap();
            let seq = solver.interpolate_sequence(&up.conjuncts).unwrap();
            assert_eq!(seq.len(), events.len() + 1);
        }
        assert_eq!(solver.stats.interpolants_verified, words.len() as u64);
    }
}

#[test]
fn rewriting_matches_its_primed_characterization() {
    // Δ(φ, a) is equivalent to ∃Q' . φ[Q'/Q] ∧ ⋀ (q' → Δ(q, a)); the
    // boolean existential is removed by explicit expansion and the
    // difference checked unsatisfiable, both directions
    let mut r = gen::rng(0xada3);
    let mut solver = Solver::default();
    for i in 0..25 {
        let a = gen::rand_automaton(&mut r, &format!("m{}_", i));
        let data: Vec<Term> = a
            .vars()
            .iter()
            .map(|v| Term::var(v.clone()).unwrap())
            .collect();
        let phi = gen::rand_positive_formula(&mut r, &data, a.states(), 2);
        let event = a.events()[0].clone();
        let rules = a.rules_for(&event).unwrap();
        let lhs = rewrite_unstamped(&phi, rules);

        // primed copy of the states
        let primes: Vec<Variable> = a
            .states()
            .iter()
            .map(|q| Variable::state(&format!("{}_prime", q.name())))
            .collect();
        let mut rename = ada_core::logic::Subst::new();
        for (q, qp) in a.states().iter().zip(primes.iter()) {
            rename.insert(
                q.clone(),
                ada_core::logic::Image::Fm(Formula::state(qp.clone()).unwrap()),
            );
        }
        let renamed = ada_core::logic::substitute(&phi, &rename).unwrap();
        let mut parts = vec![renamed];
        for (q, qp) in a.states().iter().zip(primes.iter()) {
            let rule = rules.get(q).cloned().unwrap_or_else(Formula::ff);
            parts.push(Formula::implies(
                &Formula::state(qp.clone()).unwrap(),
                &rule,
            ));
        }
        let body = Formula::and(parts);
        let rhs = gen::shannon_exists(&primes, &body);

        let differs = Formula::or(vec![
            Formula::and(vec![lhs.clone(), Formula::not(&rhs)]),
            Formula::and(vec![Formula::not(&lhs), rhs.clone()]),
        ]);
        assert!(
            !solver.check_sat(&differs).unwrap().is_sat(),
            "case {} differs: {}",
            i,
            differs
        );
    }
}

#[test]
fn interpolants_respect_the_frontier_variables() {
    let a = common::load_corpus_automaton("fig1.ada");
    let mut solver = Solver::default();
    let events: Vec<String> = vec!["a".into(), "a".into(), "b".into()];
    let up = build_theta(&a, &events).unwrap();
    let seq = solver.interpolate_sequence(&up.conjuncts).unwrap();
    for item in seq.items() {
        // unstamped items over (Q, x) only
        for v in item.free_vars() {
            assert!(v.is_plain(), "decorated variable {} in interpolant", v);
        }
    }
    // and the stamped versions bridge the conjuncts
    let first = stamp_both(&seq.items()[0], 0);
    assert!(solver.entails(&up.conjuncts[0], &first).unwrap());
}
