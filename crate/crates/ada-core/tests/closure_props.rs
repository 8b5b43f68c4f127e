//! Pointwise boolean-closure identities over randomized automata and
//! words, and the monotonicity of the post-image.

mod common;

use ada_core::automaton::{boolean_combine, complement, membership, BooleanOp};
use ada_core::logic::Term;
use ada_core::smt::Solver;
use ada_core::symbolic::post;

use common::gen;

#[test]
fn closure_identities_hold_pointwise() {
    let mut r = gen::rng(0xc105);
    let mut solver = Solver::default();
    for i in 0..200 {
        let a1 = gen::rand_automaton(&mut r, &format!("l{}_", i));
        let mut a2 = gen::rand_automaton(&mut r, &format!("r{}_", i));
        // align the variable sets by construction: regenerate until equal
        while a2.vars() != a1.vars() {
            a2 = gen::rand_automaton(&mut r, &format!("r{}x_", i));
        }
        let union = boolean_combine(&a1, &a2, BooleanOp::Union).unwrap();
        let inter = boolean_combine(&a1, &a2, BooleanOp::Intersection).unwrap();
        let comp = complement(&a1).unwrap();
        assert_eq!(comp.size(), a1.size());
        assert_eq!(union.size(), a1.size() + a2.size() + 1);
        for _ in 0..5 {
            let w = gen::rand_word(&mut r, &a1, 3);
            let in1 = membership(&a1, &w, &mut solver).unwrap();
            let in2 = membership(&a2, &w, &mut solver).unwrap();
            assert_eq!(
                membership(&union, &w, &mut solver).unwrap(),
                in1 || in2,
                "union identity failed (case {})",
                i
            );
            assert_eq!(
                membership(&inter, &w, &mut solver).unwrap(),
                in1 && in2,
                "intersection identity failed (case {})",
                i
            );
            assert_eq!(
                membership(&comp, &w, &mut solver).unwrap(),
                !in1,
                "complement identity failed (case {})",
                i
            );
        }
    }
}

#[test]
fn post_image_is_monotone() {
    let mut r = gen::rng(0xc106);
    let mut solver = Solver::default();
    let mut checked = 0;
    for i in 0..80 {
        let a = gen::rand_automaton(&mut r, &format!("m{}_", i));
        let data: Vec<Term> = a
            .vars()
            .iter()
            .map(|v| Term::var(v.clone()).unwrap())
            .collect();
        let phi = gen::rand_positive_formula(&mut r, &data, a.states(), 2);
        let psi = gen::rand_positive_formula(&mut r, &data, a.states(), 2);
        if !solver.entails(&phi, &psi).unwrap() {
            continue;
        }
        checked += 1;
        let mut lhs = phi;
        let mut rhs = psi;
        for step in 0..3.min(a.events().len() * 2) {
            let e = a.events()[step % a.events().len()].clone();
            lhs = post(&a, &lhs, &e).unwrap();
            rhs = post(&a, &rhs, &e).unwrap();
            // the right side of an entailment must be quantifier-free;
            // strip by projecting exactly
            let rhs_qf = ada_core::smt::fm::project(&rhs, &|_| true).unwrap();
            assert!(
                solver.entails(&lhs, &rhs_qf).unwrap(),
                "monotonicity failed at step {} (case {})",
                step,
                i
            );
        }
    }
    assert!(checked >= 10, "too few entailed pairs sampled: {}", checked);
}

#[test]
fn union_with_itself_preserves_the_language() {
    let mut r = gen::rng(0xc107);
    let mut solver = Solver::default();
    for i in 0..60 {
        let a = gen::rand_automaton(&mut r, &format!("u{}_", i));
        let u = boolean_combine(&a, &a, BooleanOp::Union).unwrap();
        for _ in 0..8 {
            let w = gen::rand_word(&mut r, &a, 3);
            assert_eq!(
                membership(&a, &w, &mut solver).unwrap(),
                membership(&u, &w, &mut solver).unwrap()
            );
        }
    }
}

#[test]
fn intersection_with_complement_is_empty_on_short_words() {
    let mut r = gen::rng(0xc108);
    let mut solver = Solver::default();
    for i in 0..40 {
        let a = gen::rand_automaton(&mut r, &format!("e{}_", i));
        let c = complement(&a).unwrap();
        let product = boolean_combine(&a, &c, BooleanOp::Intersection).unwrap();
        for _ in 0..10 {
            let w = gen::rand_word(&mut r, &a, 4);
            assert!(
                !membership(&product, &w, &mut solver).unwrap(),
                "word accepted by the empty product (case {})",
                i
            );
        }
    }
}
