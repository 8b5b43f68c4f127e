//! Alternating data automata: validation, linear-time boolean closure and
//! concrete-word membership.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::BigRational;
use thiserror::Error;

use crate::logic::{
    dualize, evaluate_ground, rename_vars, rewrite_step, substitute, Decor, Formula, Image,
    LogicError, Subst, Term, Valuation, Variable,
};
use crate::smt::{Solver, SolverError};

/// An alternating data automaton `⟨x, Q, ι, F, Δ⟩` over a finite event
/// alphabet. The transition table is total: rules not supplied at
/// construction are materialized as `⊥`.
#[derive(Debug, Clone)]
pub struct Automaton {
    vars: Vec<Variable>,
    states: Vec<Variable>,
    events: Vec<String>,
    init: Formula,
    finals: BTreeSet<Variable>,
    /// event → state → rule body
    rules: BTreeMap<String, BTreeMap<Variable, Formula>>,
}

/// One symbol of a data word: an event with a total valuation of the
/// automaton's variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordStep {
    pub event: String,
    pub values: BTreeMap<Variable, BigRational>,
}

/// A finite sequence of (event, valuation) symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DataWord {
    pub steps: Vec<WordStep>,
}

impl DataWord {
    pub fn empty() -> Self {
        DataWord::default()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn events(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.event.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticCode {
    DuplicateName,
    UnknownState,
    UnknownEvent,
    UnknownVariable,
    InitHasDataVariable,
    InitQuantified,
    NotPositive,
    BadDecoration,
    FinalNotAState,
}

/// A validation finding; the empty list means the automaton is well formed.
#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.code, self.message)
    }
}

#[derive(Debug, Error)]
pub enum AutomatonError {
    #[error("invalid automaton: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),

    #[error("automata have different variable sets")]
    VariableMismatch,

    #[error("complement requires quantifier-free transition rules")]
    ComplementQuantified,

    #[error("event {0} is not in the alphabet")]
    UnknownEvent(String),

    #[error("word step {step}: missing value for variable {var}")]
    MissingValue { step: usize, var: String },

    #[error(transparent)]
    Logic(#[from] LogicError),

    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl Automaton {
    /// Assemble an automaton, materializing missing rules as `⊥`. No
    /// validation happens here; call [`Automaton::validate`].
    pub fn new(
        vars: Vec<Variable>,
        states: Vec<Variable>,
        events: Vec<String>,
        init: Formula,
        finals: BTreeSet<Variable>,
        rules: BTreeMap<(Variable, String), Formula>,
    ) -> Self {
        let mut table: BTreeMap<String, BTreeMap<Variable, Formula>> = BTreeMap::new();
        for e in &events {
            let mut per_event = BTreeMap::new();
            for q in &states {
                per_event.insert(q.clone(), Formula::ff());
            }
            table.insert(e.clone(), per_event);
        }
        for ((q, e), body) in rules {
            if let Some(per_event) = table.get_mut(&e) {
                per_event.insert(q, body);
            }
        }
        Automaton {
            vars,
            states,
            events,
            init,
            finals,
            rules: table,
        }
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn states(&self) -> &[Variable] {
        &self.states
    }

    pub fn events(&self) -> &[String] {
        &self.events
    }

    pub fn init(&self) -> &Formula {
        &self.init
    }

    pub fn finals(&self) -> &BTreeSet<Variable> {
        &self.finals
    }

    pub fn is_final(&self, q: &Variable) -> bool {
        self.finals.contains(q)
    }

    pub fn rule(&self, q: &Variable, event: &str) -> Option<&Formula> {
        self.rules.get(event).and_then(|m| m.get(q))
    }

    pub fn rules_for(&self, event: &str) -> Option<&BTreeMap<Variable, Formula>> {
        self.rules.get(event)
    }

    /// `|A| = |ι| + Σ |Δ(q,a)|` over the total transition table.
    pub fn size(&self) -> u64 {
        let mut total = self.init.size();
        for per_event in self.rules.values() {
            for body in per_event.values() {
                total += body.size();
            }
        }
        total
    }

    /// Check every structural invariant; an empty report means valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut names: BTreeSet<&str> = BTreeSet::new();
        for v in self.vars.iter().chain(self.states.iter()) {
            if !names.insert(v.name()) {
                out.push(Diagnostic {
                    code: DiagnosticCode::DuplicateName,
                    message: format!("name {} declared twice", v.name()),
                });
            }
            if !v.is_plain() {
                out.push(Diagnostic {
                    code: DiagnosticCode::BadDecoration,
                    message: format!("declared variable {} carries a decoration", v),
                });
            }
        }
        let mut seen_events: BTreeSet<&str> = BTreeSet::new();
        for e in &self.events {
            if !seen_events.insert(e) {
                out.push(Diagnostic {
                    code: DiagnosticCode::DuplicateName,
                    message: format!("event {} declared twice", e),
                });
            }
        }
        for q in &self.finals {
            if !self.states.contains(q) {
                out.push(Diagnostic {
                    code: DiagnosticCode::FinalNotAState,
                    message: format!("final state {} is not declared", q),
                });
            }
        }

        // initial configuration: positive, over states only, no data
        if !self.init.is_quantifier_free() {
            out.push(Diagnostic {
                code: DiagnosticCode::InitQuantified,
                message: "initial configuration must be quantifier-free".into(),
            });
        }
        if let Some(v) = self.init.free_data().iter().next() {
            out.push(Diagnostic {
                code: DiagnosticCode::InitHasDataVariable,
                message: format!(
                    "initial configuration mentions data variable {} (initial values are unconstrained)",
                    v
                ),
            });
        }
        self.check_positive_over_states(&self.init, "initial configuration", &mut out);

        let state_set: BTreeSet<&Variable> = self.states.iter().collect();
        for (e, per_event) in &self.rules {
            for (q, body) in per_event {
                let ctx = format!("rule ({}, {})", q, e);
                if !state_set.contains(q) {
                    out.push(Diagnostic {
                        code: DiagnosticCode::UnknownState,
                        message: format!("{}: source state is not declared", ctx),
                    });
                }
                self.check_positive_over_states(body, &ctx, &mut out);
                for v in body.free_data() {
                    let ok_name = self.vars.iter().any(|w| w.name() == v.name());
                    let ok_decor = matches!(v.decor(), Decor::Plain | Decor::Prev);
                    if !ok_name || !ok_decor {
                        out.push(Diagnostic {
                            code: DiagnosticCode::UnknownVariable,
                            message: format!("{}: data variable {} is not declared", ctx, v),
                        });
                    }
                }
            }
        }
        out
    }

    fn check_positive_over_states(&self, f: &Formula, ctx: &str, out: &mut Vec<Diagnostic>) {
        for q in f.free_bools() {
            if !q.is_plain() || !self.states.contains(q) {
                out.push(Diagnostic {
                    code: DiagnosticCode::UnknownState,
                    message: format!("{}: state {} is not declared", ctx, q),
                });
            }
        }
        if !f.is_positive() {
            let witness = f
                .negative_occurrence_path()
                .map(|(v, path)| {
                    format!(
                        "state {} under odd negations at path {}",
                        v,
                        path.iter()
                            .map(|i| i.to_string())
                            .collect::<Vec<_>>()
                            .join(".")
                    )
                })
                .unwrap_or_else(|| "state under odd negations".into());
            out.push(Diagnostic {
                code: DiagnosticCode::NotPositive,
                message: format!("{}: {}", ctx, witness),
            });
        }
    }

    pub fn validated(self) -> Result<Self, AutomatonError> {
        let issues = self.validate();
        if issues.is_empty() {
            Ok(self)
        } else {
            Err(AutomatonError::Invalid(issues))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BooleanOp {
    Union,
    Intersection,
}

/// Union or intersection after aligning alphabets and renaming the second
/// automaton's states apart. Requires identical variable sets.
pub fn boolean_combine(
    a1: &Automaton,
    a2: &Automaton,
    op: BooleanOp,
) -> Result<Automaton, AutomatonError> {
    let v1: BTreeSet<&Variable> = a1.vars.iter().collect();
    let v2: BTreeSet<&Variable> = a2.vars.iter().collect();
    if v1 != v2 {
        return Err(AutomatonError::VariableMismatch);
    }

    // rename colliding states of the second automaton
    let mut taken: BTreeSet<String> = a1
        .states
        .iter()
        .chain(a2.states.iter())
        .map(|q| q.name().to_string())
        .collect();
    let mut rename: BTreeMap<Variable, Variable> = BTreeMap::new();
    for q in &a2.states {
        if a1.states.iter().any(|p| p.name() == q.name()) {
            let mut i = 1u32;
            let fresh = loop {
                let cand = format!("{}_{}", q.name(), i);
                if !taken.contains(&cand) {
                    break cand;
                }
                i += 1;
            };
            taken.insert(fresh.clone());
            rename.insert(q.clone(), Variable::state(&fresh));
        }
    }
    let rn = |f: &Formula| -> Result<Formula, LogicError> {
        rename_vars(f, &|v| rename.get(v).cloned())
    };

    let states2: Vec<Variable> = a2
        .states
        .iter()
        .map(|q| rename.get(q).cloned().unwrap_or_else(|| q.clone()))
        .collect();
    let finals2: BTreeSet<Variable> = a2
        .finals
        .iter()
        .map(|q| rename.get(q).cloned().unwrap_or_else(|| q.clone()))
        .collect();

    let mut events: Vec<String> = a1.events.clone();
    for e in &a2.events {
        if !events.contains(e) {
            events.push(e.clone());
        }
    }

    let mut rules: BTreeMap<(Variable, String), Formula> = BTreeMap::new();
    for (e, per_event) in &a1.rules {
        for (q, body) in per_event {
            rules.insert((q.clone(), e.clone()), body.clone());
        }
    }
    for (e, per_event) in &a2.rules {
        for (q, body) in per_event {
            let q2 = rename.get(q).cloned().unwrap_or_else(|| q.clone());
            rules.insert((q2, e.clone()), rn(body)?);
        }
    }

    let init2 = rn(&a2.init)?;
    let init = match op {
        BooleanOp::Union => Formula::or(vec![a1.init.clone(), init2]),
        BooleanOp::Intersection => Formula::and(vec![a1.init.clone(), init2]),
    };

    let mut states = a1.states.clone();
    states.extend(states2);
    let finals: BTreeSet<Variable> = a1.finals.union(&finals2).cloned().collect();

    Ok(Automaton::new(
        a1.vars.clone(),
        states,
        events,
        init,
        finals,
        rules,
    ))
}

/// Complement in linear time: dualize the initial configuration and every
/// rule, complement the final set. Preserves size exactly.
pub fn complement(a: &Automaton) -> Result<Automaton, AutomatonError> {
    let dual = |f: &Formula| -> Result<Formula, AutomatonError> {
        dualize(f).map_err(|e| match e {
            LogicError::QuantifiedDual => AutomatonError::ComplementQuantified,
            other => AutomatonError::Logic(other),
        })
    };
    let init = dual(&a.init)?;
    let mut rules: BTreeMap<(Variable, String), Formula> = BTreeMap::new();
    for (e, per_event) in &a.rules {
        for (q, body) in per_event {
            rules.insert((q.clone(), e.clone()), dual(body)?);
        }
    }
    let finals: BTreeSet<Variable> = a
        .states
        .iter()
        .filter(|q| !a.finals.contains(q))
        .cloned()
        .collect();
    Ok(Automaton::new(
        a.vars.clone(),
        a.states.clone(),
        a.events.clone(),
        init,
        finals,
        rules,
    ))
}

/// Does the automaton accept the word? The run formula is unfolded by
/// iterated rewriting, word values are substituted for stamped variables,
/// final states become `⊤` and the rest `⊥`; any remaining step-0 data
/// variables are resolved existentially by one satisfiability call. The
/// empty word needs no solver at all.
pub fn membership(
    a: &Automaton,
    w: &DataWord,
    solver: &mut Solver,
) -> Result<bool, AutomatonError> {
    for (i, step) in w.steps.iter().enumerate() {
        if !a.events.contains(&step.event) {
            return Err(AutomatonError::UnknownEvent(step.event.clone()));
        }
        for v in &a.vars {
            if !step.values.contains_key(v) {
                return Err(AutomatonError::MissingValue {
                    step: i + 1,
                    var: v.to_string(),
                });
            }
        }
    }

    if w.is_empty() {
        let mut nu = Valuation::new();
        for q in &a.states {
            nu.set_bool(q.clone(), a.is_final(q));
        }
        return Ok(evaluate_ground(&a.init, &nu)?);
    }

    let mut phi = a.init.clone();
    for (k, step) in w.steps.iter().enumerate() {
        let rules = a.rules_for(&step.event).expect("validated event");
        phi = rewrite_step(&phi, rules, k as u32);
    }

    let mut map = Subst::new();
    for q in &a.states {
        map.insert(
            q.clone(),
            Image::Fm(Formula::bool_const(a.is_final(q))),
        );
    }
    for (k, step) in w.steps.iter().enumerate() {
        for (v, val) in &step.values {
            map.insert(
                v.at(k as u32 + 1),
                Image::Tm(Term::constant(val.clone())),
            );
        }
    }
    let ground = substitute(&phi, &map)?;
    // only step-0 variables may remain; they are existential
    Ok(solver.check_sat(&ground)?.is_sat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfix::*;

    #[test]
    fn the_example_automaton_validates() {
        assert!(lockstep_counters().validate().is_empty());
    }

    #[test]
    fn negated_state_yields_parity_diagnostic() {
        let mut rules = BTreeMap::new();
        rules.insert(
            (Variable::state("q"), "a".to_string()),
            Formula::not(&st("q")),
        );
        let a = Automaton::new(
            vec![xv()],
            vec![Variable::state("q")],
            vec!["a".into()],
            st("q"),
            BTreeSet::new(),
            rules,
        );
        let issues = a.validate();
        assert!(issues
            .iter()
            .any(|d| d.code == DiagnosticCode::NotPositive
                && d.message.contains("odd negations")));
    }

    #[test]
    fn init_mentioning_data_is_diagnosed() {
        let a = Automaton::new(
            vec![xv()],
            vec![Variable::state("q")],
            vec!["a".into()],
            Formula::and(vec![st("q"), Formula::eq(xt(), Term::int(0))]),
            BTreeSet::new(),
            BTreeMap::new(),
        );
        let issues = a.validate();
        assert!(issues
            .iter()
            .any(|d| d.code == DiagnosticCode::InitHasDataVariable));
    }

    #[test]
    fn complement_swaps_acceptance_of_the_sample_word() {
        let a = lockstep_counters();
        let c = complement(&a).unwrap();
        let mut s = crate::smt::Solver::default();
        let w = word(&[("a", 0, 0), ("a", 1, 1), ("b", 2, 1)]);
        assert!(!membership(&a, &w, &mut s).unwrap());
        assert!(membership(&c, &w, &mut s).unwrap());
    }

    #[test]
    fn complement_is_an_involution_and_preserves_size() {
        let a = lockstep_counters();
        let c = complement(&a).unwrap();
        assert_eq!(c.size(), a.size());
        let cc = complement(&c).unwrap();
        assert_eq!(cc.init(), a.init());
        assert_eq!(cc.finals(), a.finals());
        for q in a.states() {
            for e in a.events() {
                assert_eq!(cc.rule(q, e), a.rule(q, e));
            }
        }
    }

    #[test]
    fn union_size_is_the_sum_plus_one_connective() {
        let a = lockstep_counters();
        let b = lockstep_counters_relaxed();
        let u = boolean_combine(&a, &b, BooleanOp::Union).unwrap();
        assert!(u.validate().is_empty());
        assert_eq!(u.size(), a.size() + b.size() + 1);
        assert_eq!(u.states().len(), 10);
    }

    #[test]
    fn union_membership_distributes_on_the_sample_words() {
        let a = lockstep_counters();
        let b = lockstep_counters_relaxed();
        let u = boolean_combine(&a, &b, BooleanOp::Union).unwrap();
        let i = boolean_combine(&a, &b, BooleanOp::Intersection).unwrap();
        let mut s = crate::smt::Solver::default();
        for w in [
            word(&[("a", 0, 0), ("b", 0, 0)]),
            word(&[("a", 0, 0), ("a", 1, 1), ("b", 2, 1)]),
            word(&[("a", 0, 0)]),
            DataWord::empty(),
        ] {
            let in_a = membership(&a, &w, &mut s).unwrap();
            let in_b = membership(&b, &w, &mut s).unwrap();
            assert_eq!(membership(&u, &w, &mut s).unwrap(), in_a || in_b);
            assert_eq!(membership(&i, &w, &mut s).unwrap(), in_a && in_b);
        }
    }

    #[test]
    fn combine_rejects_different_variable_sets() {
        let a = lockstep_counters();
        let b = Automaton::new(
            vec![xv()],
            vec![Variable::state("p")],
            vec!["a".into()],
            st("p"),
            BTreeSet::new(),
            BTreeMap::new(),
        );
        assert!(matches!(
            boolean_combine(&a, &b, BooleanOp::Union),
            Err(AutomatonError::VariableMismatch)
        ));
    }

    #[test]
    fn epsilon_membership_depends_on_final_initial_states() {
        let mk = |is_final: bool| {
            Automaton::new(
                vec![xv()],
                vec![Variable::state("q")],
                vec!["a".into()],
                st("q"),
                if is_final {
                    BTreeSet::from([Variable::state("q")])
                } else {
                    BTreeSet::new()
                },
                BTreeMap::new(),
            )
        };
        let mut s = crate::smt::Solver::default();
        assert!(membership(&mk(true), &DataWord::empty(), &mut s).unwrap());
        assert!(!membership(&mk(false), &DataWord::empty(), &mut s).unwrap());
    }

    #[test]
    fn membership_with_unconstrained_initial_values() {
        // a single rule constraining only the previous value: acceptance
        // must existentially resolve the step-0 variables
        let mut rules = BTreeMap::new();
        rules.insert(
            (Variable::state("q"), "a".to_string()),
            Formula::and(vec![st("f"), Formula::ge(xprev(), Term::int(3))]),
        );
        let a = Automaton::new(
            vec![xv()],
            vec![Variable::state("q"), Variable::state("f")],
            vec!["a".into()],
            st("q"),
            BTreeSet::from([Variable::state("f")]),
            rules,
        );
        let mut s = crate::smt::Solver::default();
        let w = DataWord {
            steps: vec![WordStep {
                event: "a".into(),
                values: BTreeMap::from([(xv(), rat(7))]),
            }],
        };
        assert!(membership(&a, &w, &mut s).unwrap());
    }
}
