//! Symbolic semantics shared by both emptiness procedures: post-images,
//! predicate abstraction, acceptance unfoldings and the bounded
//! brute-force oracle.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num::BigRational;

use crate::automaton::{Automaton, AutomatonError, DataWord, WordStep};
use crate::logic::{
    data_to_prev, rewrite_unstamped, Formula, Valuation, Variable,
};
use crate::smt::{fm, stamp_both, SatResult, Solver, SolverError, StepRepair};

/// A deduplicated, insertion-ordered set of abstraction predicates over
/// unstamped `(Q, x)`; always contains `⊥`.
#[derive(Debug, Clone)]
pub struct PredicateSet {
    preds: Vec<Formula>,
    seen: HashSet<u64>,
}

impl Default for PredicateSet {
    fn default() -> Self {
        Self::new()
    }
}

impl PredicateSet {
    pub fn new() -> Self {
        let bot = Formula::ff();
        let mut seen = HashSet::new();
        seen.insert(bot.id());
        PredicateSet {
            preds: vec![bot],
            seen,
        }
    }

    /// Insert a predicate; returns true when it is new.
    pub fn insert(&mut self, f: Formula) -> bool {
        if self.seen.insert(f.id()) {
            self.preds.push(f);
            true
        } else {
            false
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.preds.iter()
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        false // ⊥ is always present
    }
}

/// Post-image `Post(φ, a) ≡ ∃x̄ . Δ(φ[x̄/x], a)`. The existential stays
/// explicit; consumers place the result on the left of entailments, where
/// fresh renaming suffices.
pub fn post(a: &Automaton, phi: &Formula, event: &str) -> Result<Formula, AutomatonError> {
    let rules = a
        .rules_for(event)
        .ok_or_else(|| AutomatonError::UnknownEvent(event.to_string()))?;
    let shifted = data_to_prev(phi);
    let rewritten = rewrite_unstamped(&shifted, rules);
    let binders: Vec<Variable> = a.vars().iter().map(|v| v.as_prev()).collect();
    Ok(Formula::exists(binders, rewritten))
}

/// Abstraction `φ♯ ≡ ⋀ {π ∈ Π | φ ⊨ π}`; the conjunction of exactly the
/// entailed predicates, `⊤` when none. Entailments are memoized inside the
/// solver session.
pub fn abstract_image(
    solver: &mut Solver,
    phi: &Formula,
    preds: &PredicateSet,
) -> Result<Formula, SolverError> {
    let mut parts = Vec::new();
    for pi in preds.iter() {
        if solver.entails(phi, pi)? {
            parts.push(pi.clone());
        }
    }
    Ok(Formula::and_s(parts))
}

/// `⋀_{q ∈ Q∖F} (q → ⊥)` over unstamped states.
pub fn acceptance_conjunct(a: &Automaton) -> Formula {
    let parts = a
        .states()
        .iter()
        .filter(|q| !a.is_final(q))
        .map(|q| {
            Formula::implies(
                &Formula::state(q.clone()).expect("state var"),
                &Formula::ff(),
            )
        })
        .collect();
    Formula::and_s(parts)
}

/// The time-stamped unfolding `Θ = θ₀ ∧ … ∧ θ_{n+1}` of a run over an
/// event sequence, with its replacement sets.
#[derive(Debug, Clone)]
pub struct UnfoldingProblem {
    pub events: Vec<String>,
    /// `θ₀ … θ_{n+1}`
    pub conjuncts: Vec<Formula>,
    /// `R₀ … R_n`: stamped states replaced at each step.
    pub repl_sets: Vec<BTreeSet<Variable>>,
}

impl UnfoldingProblem {
    pub fn conjunction(&self) -> Formula {
        Formula::and_s(self.conjuncts.clone())
    }
}

/// Build `Θ(u)` seeded with the initial configuration.
pub fn build_theta(a: &Automaton, events: &[String]) -> Result<UnfoldingProblem, AutomatonError> {
    build_theta_seeded(a, a.init(), events)
}

/// Build the unfolding seeded with an arbitrary configuration over
/// unstamped `(Q, x)`; used for pivot problems, where the seed is a node
/// label.
pub fn build_theta_seeded(
    a: &Automaton,
    seed: &Formula,
    events: &[String],
) -> Result<UnfoldingProblem, AutomatonError> {
    for e in events {
        if !a.events().contains(e) {
            return Err(AutomatonError::UnknownEvent(e.clone()));
        }
    }
    let n = events.len();
    let theta0 = stamp_both(seed, 0);
    let mut repl: Vec<BTreeSet<Variable>> = Vec::with_capacity(n + 1);
    repl.push(theta0.free_bools().cloned().collect());
    let mut conjuncts = Vec::with_capacity(n + 2);
    conjuncts.push(theta0);

    for (idx, event) in events.iter().enumerate() {
        let step = idx as u32 + 1; // building θ_step
        let rules = a.rules_for(event).expect("checked alphabet");
        let mut parts = Vec::new();
        for q_prev in &repl[idx] {
            let plain = q_prev.plain();
            let body = rules.get(&plain).cloned().unwrap_or_else(Formula::ff);
            let stamped = crate::logic::stamp_states(
                &crate::logic::stamp_rule_data(&body, step - 1),
                step,
            );
            let head = Formula::state(q_prev.clone()).expect("state var");
            parts.push(Formula::implies(&head, &stamped));
        }
        let theta = Formula::and_s(parts);
        let r: BTreeSet<Variable> = theta
            .free_bools()
            .filter(|v| v.stamp() == Some(step))
            .cloned()
            .collect();
        conjuncts.push(theta);
        repl.push(r);
    }

    // acceptance: last remaining non-final states forced false
    let accept_parts = a
        .states()
        .iter()
        .filter(|q| !a.is_final(q))
        .map(|q| {
            Formula::implies(
                &Formula::state(q.at(n as u32)).expect("state var"),
                &Formula::ff(),
            )
        })
        .collect();
    conjuncts.push(Formula::and_s(accept_parts));

    Ok(UnfoldingProblem {
        events: events.to_vec(),
        conjuncts,
        repl_sets: repl,
    })
}

/// Satisfiability of `Θ(u)`: `Sat` means the event sequence extends to an
/// accepted data word, recoverable through [`witness_from_model`]; `Unsat`
/// certifies spuriousness.
pub fn feasibility(
    a: &Automaton,
    events: &[String],
    solver: &mut Solver,
) -> Result<SatResult, AutomatonError> {
    let up = build_theta(a, events)?;
    Ok(solver.check_sat(&up.conjunction())?)
}

/// Read a data word off a stamped model of `Θ(u)`: step `k` takes the
/// values of `x@k`, defaulting to zero for unconstrained variables.
pub fn witness_from_model(a: &Automaton, events: &[String], model: &Valuation) -> DataWord {
    let steps = events
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let k = i as u32 + 1;
            let values: BTreeMap<Variable, BigRational> = a
                .vars()
                .iter()
                .map(|v| {
                    let val = model
                        .rat_of(&v.at(k))
                        .unwrap_or_else(|| BigRational::from_integer(0.into()));
                    (v.clone(), val)
                })
                .collect();
            WordStep {
                event: e.clone(),
                values,
            }
        })
        .collect();
    DataWord { steps }
}

/// Outcome of the naive enumeration semi-algorithm.
#[derive(Debug, Clone)]
pub enum BoundedOutcome {
    EmptyUpTo(u32),
    Witness(DataWord),
}

/// Enumerate all event sequences of length at most `k` in
/// length-lexicographic order (alphabet in declaration order) and return
/// the first feasible one as a membership-checked witness.
pub fn bounded_oracle(
    a: &Automaton,
    k: u32,
    solver: &mut Solver,
) -> Result<BoundedOutcome, AutomatonError> {
    for len in 0..=k {
        if len > 0 && a.events().is_empty() {
            break;
        }
        let mut indices = vec![0usize; len as usize];
        loop {
            let events: Vec<String> = indices
                .iter()
                .map(|&i| a.events()[i].clone())
                .collect();
            if let SatResult::Sat(model) = feasibility(a, &events, solver)? {
                let w = witness_from_model(a, &events, &model);
                if !crate::automaton::membership(a, &w, solver)? {
                    return Err(AutomatonError::Solver(SolverError::Internal(
                        "feasible unfolding produced a rejected witness".into(),
                    )));
                }
                return Ok(BoundedOutcome::Witness(w));
            }
            // odometer over the alphabet
            let mut pos = indices.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                indices[pos] += 1;
                if indices[pos] < a.events().len() {
                    break;
                }
                indices[pos] = 0;
            }
            if indices.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    Ok(BoundedOutcome::EmptyUpTo(k))
}

/// The abstract acceptance check of the progress property: iterate
/// `abstract_image ∘ post` along `u` from the initial configuration and
/// test whether the result still reaches acceptance.
pub fn abstract_accept_is_sat(
    a: &Automaton,
    events: &[String],
    preds: &PredicateSet,
    solver: &mut Solver,
) -> Result<bool, AutomatonError> {
    let mut phi = a.init().clone();
    for e in events {
        let p = post(a, &phi, e)?;
        phi = abstract_image(solver, &p, preds)?;
    }
    let q = Formula::and_s(vec![phi, acceptance_conjunct(a)]);
    Ok(solver.check_sat(&q)?.is_sat())
}

/// Positivization repair backed by exact quantifier-free post-images.
pub struct PostRepair<'a> {
    automaton: &'a Automaton,
    seed: Formula,
    events: &'a [String],
}

impl<'a> PostRepair<'a> {
    pub fn new(automaton: &'a Automaton, seed: Formula, events: &'a [String]) -> Self {
        PostRepair {
            automaton,
            seed,
            events,
        }
    }
}

impl StepRepair for PostRepair<'_> {
    fn initial(&self) -> Formula {
        self.seed.clone()
    }

    fn step(&self, i: usize, prev: &Formula) -> Result<Formula, SolverError> {
        let event = &self.events[i - 1];
        let rules = self
            .automaton
            .rules_for(event)
            .expect("events validated upstream");
        let shifted = data_to_prev(prev);
        let rewritten = rewrite_unstamped(&shifted, rules);
        // eliminate the previous-step variables exactly
        fm::project(&rewritten, &|v: &Variable| !v.is_prev())
    }
}
