//! Seeded random generators for formulas, automata, words and mutations.

use std::collections::{BTreeMap, BTreeSet};

use num::BigRational;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ada_core::automaton::{Automaton, DataWord, WordStep};
use ada_core::logic::{Formula, Kind, Rel, Term, Variable};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn small_coeff(r: &mut StdRng) -> i64 {
    *[-3, -2, -1, 1, 2, 3].iter().nth(r.gen_range(0..6)).unwrap()
}

/// A random linear atom over up to two of the given data variables.
pub fn rand_atom(r: &mut StdRng, data: &[Term]) -> Formula {
    let mut lhs = Term::zero();
    let picks = r.gen_range(1..=2.min(data.len().max(1)));
    for _ in 0..picks {
        if data.is_empty() {
            break;
        }
        let v = data[r.gen_range(0..data.len())].clone();
        lhs = lhs + v.scale(&rat(small_coeff(r)));
    }
    let rhs = Term::int(r.gen_range(-4..=4));
    match r.gen_range(0..4) {
        0 => Formula::le(lhs, rhs),
        1 => Formula::lt(lhs, rhs),
        2 => Formula::ge(lhs, rhs),
        _ => Formula::eq(lhs, rhs),
    }
}

/// An arbitrary quantifier-free formula; negations allowed anywhere.
pub fn rand_formula(
    r: &mut StdRng,
    data: &[Term],
    bools: &[Variable],
    depth: u32,
) -> Formula {
    if depth == 0 || r.gen_bool(0.3) {
        return match r.gen_range(0..6) {
            0 if !bools.is_empty() => {
                Formula::state(bools[r.gen_range(0..bools.len())].clone()).unwrap()
            }
            1 => Formula::tt(),
            2 => Formula::ff(),
            _ => rand_atom(r, data),
        };
    }
    match r.gen_range(0..3) {
        0 => Formula::not(&rand_formula(r, data, bools, depth - 1)),
        1 => {
            let n = r.gen_range(2..=3);
            Formula::and((0..n).map(|_| rand_formula(r, data, bools, depth - 1)).collect())
        }
        _ => {
            let n = r.gen_range(2..=3);
            Formula::or((0..n).map(|_| rand_formula(r, data, bools, depth - 1)).collect())
        }
    }
}

/// A random member of `Form+`: states occur only positively; atoms may be
/// negated.
pub fn rand_positive_formula(
    r: &mut StdRng,
    data: &[Term],
    bools: &[Variable],
    depth: u32,
) -> Formula {
    if depth == 0 || r.gen_bool(0.3) {
        return match r.gen_range(0..5) {
            0 | 1 if !bools.is_empty() => {
                Formula::state(bools[r.gen_range(0..bools.len())].clone()).unwrap()
            }
            2 => {
                let a = rand_atom(r, data);
                if r.gen_bool(0.3) {
                    Formula::not(&a)
                } else {
                    a
                }
            }
            _ => rand_atom(r, data),
        };
    }
    let n = r.gen_range(2..=3);
    let children = (0..n)
        .map(|_| rand_positive_formula(r, data, bools, depth - 1))
        .collect();
    if r.gen_bool(0.5) {
        Formula::and(children)
    } else {
        Formula::or(children)
    }
}

/// A small random automaton with positive rules over previous and current
/// variables.
pub fn rand_automaton(r: &mut StdRng, seed_tag: &str) -> Automaton {
    let n_vars = r.gen_range(1..=2);
    let n_states = r.gen_range(1..=3);
    let n_events = r.gen_range(1..=2);
    let vars: Vec<Variable> = (0..n_vars)
        .map(|i| Variable::data(&format!("v{}", i)))
        .collect();
    let states: Vec<Variable> = (0..n_states)
        .map(|i| Variable::state(&format!("{}s{}", seed_tag, i)))
        .collect();
    let events: Vec<String> = ["a", "b"][..n_events].iter().map(|s| s.to_string()).collect();

    let mut data_terms: Vec<Term> = vars.iter().map(|v| Term::var(v.clone()).unwrap()).collect();
    data_terms.extend(vars.iter().map(|v| Term::var(v.as_prev()).unwrap()));

    let init = rand_init(r, &states);
    let mut finals = BTreeSet::new();
    for q in &states {
        if r.gen_bool(0.5) {
            finals.insert(q.clone());
        }
    }
    let mut rules = BTreeMap::new();
    for q in &states {
        for e in &events {
            if r.gen_bool(0.75) {
                rules.insert(
                    (q.clone(), e.clone()),
                    rand_positive_formula(r, &data_terms, &states, 2),
                );
            }
        }
    }
    let a = Automaton::new(vars, states, events, init, finals, rules);
    debug_assert!(a.validate().is_empty());
    a
}

fn rand_init(r: &mut StdRng, states: &[Variable]) -> Formula {
    let leaves: Vec<Formula> = states
        .iter()
        .filter(|_| r.gen_bool(0.7))
        .map(|q| Formula::state(q.clone()).unwrap())
        .collect();
    if leaves.is_empty() {
        return Formula::state(states[0].clone()).unwrap();
    }
    if leaves.len() == 1 {
        return leaves.into_iter().next().unwrap();
    }
    if r.gen_bool(0.5) {
        Formula::or(leaves)
    } else {
        Formula::and(leaves)
    }
}

/// A random word over the automaton's alphabet, with values from a small
/// grid.
pub fn rand_word(r: &mut StdRng, a: &Automaton, max_len: usize) -> DataWord {
    let len = r.gen_range(0..=max_len);
    let grid = [-1i64, 0, 1, 2];
    let steps = (0..len)
        .map(|_| WordStep {
            event: a.events()[r.gen_range(0..a.events().len())].clone(),
            values: a
                .vars()
                .iter()
                .map(|v| (v.clone(), rat(grid[r.gen_range(0..grid.len())])))
                .collect(),
        })
        .collect();
    DataWord { steps }
}

/// Mutate one structural aspect of an automaton: an atom constant, a
/// comparison operator, a connective, the final set, or a dropped rule.
/// Positivity is preserved by construction.
pub fn mutate_automaton(r: &mut StdRng, a: &Automaton) -> Automaton {
    let mut rules: BTreeMap<(Variable, String), Formula> = BTreeMap::new();
    for q in a.states() {
        for e in a.events() {
            rules.insert((q.clone(), e.clone()), a.rule(q, e).unwrap().clone());
        }
    }
    let mut finals = a.finals().clone();
    match r.gen_range(0..5) {
        0 | 1 => {
            // mutate a random rule body
            let keys: Vec<_> = rules
                .keys()
                .filter(|k| *rules.get(k).unwrap() != Formula::ff())
                .cloned()
                .collect();
            if let Some(key) = pick(r, &keys) {
                let body = rules[&key].clone();
                let mutated = mutate_formula(r, &body);
                rules.insert(key, mutated);
            }
        }
        2 => {
            // toggle a final state
            let q = a.states()[r.gen_range(0..a.states().len())].clone();
            if !finals.remove(&q) {
                finals.insert(q);
            }
        }
        3 => {
            // drop a rule
            let keys: Vec<_> = rules.keys().cloned().collect();
            if let Some(key) = pick(r, &keys) {
                rules.insert(key, Formula::ff());
            }
        }
        _ => {
            // relax or tighten: mutate two rule bodies
            for _ in 0..2 {
                let keys: Vec<_> = rules
                    .keys()
                    .filter(|k| *rules.get(k).unwrap() != Formula::ff())
                    .cloned()
                    .collect();
                if let Some(key) = pick(r, &keys) {
                    let body = rules[&key].clone();
                    rules.insert(key.clone(), mutate_formula(r, &body));
                }
            }
        }
    }
    Automaton::new(
        a.vars().to_vec(),
        a.states().to_vec(),
        a.events().to_vec(),
        a.init().clone(),
        finals,
        rules,
    )
}

fn pick<T: Clone>(r: &mut StdRng, items: &[T]) -> Option<T> {
    if items.is_empty() {
        None
    } else {
        Some(items[r.gen_range(0..items.len())].clone())
    }
}

/// Rebuild a formula with one random local change.
pub fn mutate_formula(r: &mut StdRng, f: &Formula) -> Formula {
    let size = f.size().max(1);
    let mut fuel = r.gen_range(0..size);
    let out = rewrite(r, f, &mut fuel);
    if out == *f {
        // fuel landed on an immutable node; force a change at the root
        Formula::and(vec![f.clone()])
    } else {
        out
    }
}

fn rewrite(r: &mut StdRng, f: &Formula, fuel: &mut u64) -> Formula {
    match f.kind() {
        Kind::Atom(a) => {
            if *fuel == 0 {
                let expr = a.expr().clone();
                let bound = Term::constant(a.rhs().clone());
                return match r.gen_range(0..3) {
                    0 => {
                        // shift the constant
                        let delta = Term::int(r.gen_range(1..=3) * if r.gen_bool(0.5) { 1 } else { -1 });
                        Formula::atom(expr, a.rel(), bound + delta)
                    }
                    1 => {
                        // flip the operator
                        let rel = match a.rel() {
                            Rel::Le => Rel::Lt,
                            Rel::Lt => Rel::Le,
                            Rel::Eq => Rel::Le,
                        };
                        Formula::atom(expr, rel, bound)
                    }
                    _ => {
                        // reverse the comparison
                        Formula::atom(bound, a.rel(), expr)
                    }
                };
            }
            *fuel -= 1;
            f.clone()
        }
        Kind::And(fs) | Kind::Or(fs) => {
            let conj = matches!(f.kind(), Kind::And(_));
            if *fuel == 0 {
                // swap the connective
                let children = fs.to_vec();
                return if conj {
                    Formula::or(children)
                } else {
                    Formula::and(children)
                };
            }
            *fuel -= 1;
            let children = fs.iter().map(|c| rewrite(r, c, fuel)).collect();
            if conj {
                Formula::and(children)
            } else {
                Formula::or(children)
            }
        }
        Kind::Not(inner) => {
            if *fuel > 0 {
                *fuel -= 1;
            }
            Formula::not(&rewrite(r, inner, fuel))
        }
        _ => {
            if *fuel > 0 {
                *fuel -= 1;
            }
            f.clone()
        }
    }
}

/// Shannon expansion of a boolean existential: the disjunction over all
/// assignments to the bound variables.
pub fn shannon_exists(bools: &[Variable], body: &Formula) -> Formula {
    use ada_core::logic::{substitute, Image, Subst};
    let mut disjuncts = Vec::new();
    for mask in 0..(1u32 << bools.len()) {
        let mut map = Subst::new();
        for (i, q) in bools.iter().enumerate() {
            let val = mask & (1 << i) != 0;
            map.insert(q.clone(), Image::Fm(Formula::bool_const(val)));
        }
        disjuncts.push(substitute(body, &map).unwrap());
    }
    Formula::or_s(disjuncts)
}
