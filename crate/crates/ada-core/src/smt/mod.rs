//! The embedded satisfiability and interpolation engine.
//!
//! One [`Solver`] is a single-threaded session owning an entailment memo
//! and counters; distinct sessions may run concurrently on disjoint
//! queries. Satisfiability is decided by CDCL over a simplex theory core,
//! complete for quantifier-free boolean + linear rational arithmetic.
//! Sequence interpolants are extracted from the refutation (Farkas sums
//! for theory conflicts, shared-literal projection for input clauses),
//! with an exact-projection fallback strategy that serves as an
//! independent cross-check.

pub mod fm;
mod interpolate;
mod positivize;
mod preprocess;
mod sat;
mod simplex;

pub use positivize::{positivize, StepRepair};

use std::collections::HashMap;
use std::time::Instant;

use num::BigRational;
use thiserror::Error;

use crate::logic::{
    stamp_data, stamp_states, unstamp, Formula, LogicError, Sort, Valuation, Variable,
};

use preprocess::preprocess;
use sat::{SatCore, SatOptions};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("budget exceeded after {conflicts} conflicts")]
    Budget { conflicts: u64 },

    #[error("universal quantification is outside the solver fragment")]
    UniversalQuantifier,

    #[error("right-hand side of an entailment must be quantifier-free")]
    RightQuantified,

    #[error("interpolation called on a satisfiable conjunction")]
    InterpolationOnSat(Box<Valuation>),

    #[error("projection exceeded the cube budget")]
    ProjectionBlowup,

    #[error("interpolation contract violated: {0}")]
    InterpolantContract(String),

    #[error(transparent)]
    Logic(#[from] LogicError),

    #[error("internal solver error: {0}")]
    Internal(String),
}

/// Verdict of a satisfiability query. A budget overrun is reported as
/// [`SolverError::Budget`], never as a verdict.
#[derive(Debug, Clone)]
pub enum SatResult {
    /// Satisfiable, with a total model over the query's free variables.
    Sat(Valuation),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }
}

/// How sequence interpolants are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpolationStrategy {
    /// From the refutation proof (default).
    Proof,
    /// Exact projection of each prefix by boolean expansion and
    /// Fourier–Motzkin; always contract-valid, weak generalization.
    ExactPost,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_conflicts: u64,
    pub deadline: Option<Instant>,
    pub strategy: InterpolationStrategy,
    /// Re-check every produced interpolation sequence against its contract.
    pub verify_interpolants: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_conflicts: 1_000_000,
            deadline: None,
            strategy: InterpolationStrategy::Proof,
            verify_interpolants: cfg!(debug_assertions),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolverStats {
    pub sat_checks: u64,
    pub entailment_checks: u64,
    pub memo_hits: u64,
    pub interpolations: u64,
    pub interpolants_verified: u64,
    pub conflicts: u64,
}

/// A sequence interpolant `⟨⊤, I₀, …, I_n, ⊥⟩` over unstamped variables;
/// the `⊤`/`⊥` boundary elements are implicit in storage and literal in
/// [`InterpolationSequence::full`].
#[derive(Debug, Clone)]
pub struct InterpolationSequence {
    items: Vec<Formula>,
}

impl InterpolationSequence {
    pub fn new(items: Vec<Formula>) -> Self {
        InterpolationSequence { items }
    }

    pub fn items(&self) -> &[Formula] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// With the literal `⊤` and `⊥` boundary elements.
    pub fn full(&self) -> Vec<Formula> {
        let mut v = Vec::with_capacity(self.items.len() + 2);
        v.push(Formula::tt());
        v.extend(self.items.iter().cloned());
        v.push(Formula::ff());
        v
    }

    pub fn all_positive(&self) -> bool {
        self.items.iter().all(|f| f.is_positive())
    }
}

/// A solver session: owns mutable state (memo, counters) and must not be
/// shared across threads; queries and results are immutable values.
pub struct Solver {
    pub config: SolverConfig,
    pub stats: SolverStats,
    entail_memo: HashMap<(u64, u64), bool>,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Self {
        Solver {
            config,
            stats: SolverStats::default(),
            entail_memo: HashMap::new(),
        }
    }

    fn sat_options(&self) -> SatOptions {
        SatOptions {
            max_conflicts: self.config.max_conflicts,
            deadline: self.config.deadline,
        }
    }

    /// Decide satisfiability. Top-level existentials (in positive
    /// positions) are stripped by fresh renaming, which preserves
    /// satisfiability; a returned model is total on the free variables and
    /// re-evaluates to true.
    pub fn check_sat(&mut self, f: &Formula) -> Result<SatResult, SolverError> {
        self.stats.sat_checks += 1;
        let prep = preprocess(f)?;
        let mut core = SatCore::new(1);
        core.add_conjunct(&prep.root, 0);
        let outcome = core.solve(&self.sat_options())?;
        self.stats.conflicts += core.conflicts();
        match outcome {
            sat::SatOutcome::Unknown { conflicts } => Err(SolverError::Budget { conflicts }),
            sat::SatOutcome::Unsat(_) => Ok(SatResult::Unsat),
            sat::SatOutcome::Sat(internal) => {
                // total valuation over the solver's view, defaults for
                // variables that fell away during normalization
                let mut full = internal.clone();
                let mut nform_vars = std::collections::BTreeSet::new();
                prep.root.collect_vars(&mut nform_vars);
                for v in &nform_vars {
                    if full.get(v).is_none() {
                        default_bind(&mut full, v);
                    }
                }
                if !prep.root.evaluate(&full)? {
                    return Err(SolverError::Internal(
                        "model does not satisfy the normalized formula".into(),
                    ));
                }
                // restrict to the caller's free variables
                let mut user = Valuation::new();
                for v in f.free_vars() {
                    match full.get(&v) {
                        Some(val) => {
                            user.set(v, val.clone());
                        }
                        None => default_bind(&mut user, &v),
                    }
                }
                Ok(SatResult::Sat(user))
            }
        }
    }

    /// `lhs ⊨ rhs`, via unsatisfiability of `lhs ∧ ¬rhs`. The left side may
    /// carry existentials; the right side must be quantifier-free.
    pub fn entails(&mut self, lhs: &Formula, rhs: &Formula) -> Result<bool, SolverError> {
        if !rhs.is_quantifier_free() {
            return Err(SolverError::RightQuantified);
        }
        if lhs == rhs || *rhs == Formula::tt() || *lhs == Formula::ff() {
            return Ok(true);
        }
        let key = (lhs.id(), rhs.id());
        if let Some(&hit) = self.entail_memo.get(&key) {
            self.stats.memo_hits += 1;
            return Ok(hit);
        }
        self.stats.entailment_checks += 1;
        let query = Formula::and_s(vec![lhs.clone(), Formula::not(rhs)]);
        let holds = !self.check_sat(&query)?.is_sat();
        self.entail_memo.insert(key, holds);
        Ok(holds)
    }

    /// Sequence interpolation for a time-stamped conjunction
    /// `θ₀ ∧ … ∧ θ_{n+1}` where `θ_i` is written over stamps `i-1`, `i`.
    /// Returns `⟨I₀, …, I_n⟩` over unstamped variables. The conjunction
    /// must be unsatisfiable; a satisfiable input is rejected with its
    /// model as evidence.
    pub fn interpolate_sequence(
        &mut self,
        conjuncts: &[Formula],
    ) -> Result<InterpolationSequence, SolverError> {
        assert!(conjuncts.len() >= 2, "need at least two conjuncts");
        let seq = match self.config.strategy {
            InterpolationStrategy::Proof => self.proof_interpolants(conjuncts)?,
            InterpolationStrategy::ExactPost => self.exact_post_interpolants(conjuncts)?,
        };
        self.stats.interpolations += 1;
        if self.config.verify_interpolants {
            self.verify_sequence(conjuncts, &seq)?;
            self.stats.interpolants_verified += 1;
        }
        Ok(seq)
    }

    fn proof_interpolants(
        &mut self,
        conjuncts: &[Formula],
    ) -> Result<InterpolationSequence, SolverError> {
        let mut core = SatCore::new(conjuncts.len() as u32);
        for (i, c) in conjuncts.iter().enumerate() {
            let prep = preprocess(c)?;
            core.add_conjunct(&prep.root, i as u32);
        }
        let outcome = core.solve(&self.sat_options())?;
        self.stats.conflicts += core.conflicts();
        match outcome {
            sat::SatOutcome::Unknown { conflicts } => Err(SolverError::Budget { conflicts }),
            sat::SatOutcome::Sat(model) => {
                Err(SolverError::InterpolationOnSat(Box::new(model)))
            }
            sat::SatOutcome::Unsat(itps) => {
                let itps = itps.ok_or_else(|| {
                    SolverError::Internal("missing interpolant vector".into())
                })?;
                let mut items = Vec::with_capacity(itps.len());
                for (i, f) in itps.iter().enumerate() {
                    let plain = unstamp(f, i as u32).map_err(|e| {
                        SolverError::Internal(format!(
                            "cut {} interpolant escapes its frontier: {} ({})",
                            i, f, e
                        ))
                    })?;
                    items.push(plain);
                }
                Ok(InterpolationSequence::new(items))
            }
        }
    }

    /// Fallback strategy: `I_i` is the exact projection of
    /// `θ₀ ∧ … ∧ θ_i` onto the stamp-`i` frontier.
    fn exact_post_interpolants(
        &mut self,
        conjuncts: &[Formula],
    ) -> Result<InterpolationSequence, SolverError> {
        let cuts = conjuncts.len() - 1;
        let mut items: Vec<Formula> = Vec::with_capacity(cuts);
        let mut prev = Formula::tt();
        for i in 0..cuts {
            let carried = if i == 0 {
                conjuncts[0].clone()
            } else {
                Formula::and_s(vec![stamp_both(&prev, (i - 1) as u32), conjuncts[i].clone()])
            };
            let stamp = i as u32;
            let projected = fm::project(&carried, &|v: &Variable| v.stamp() == Some(stamp))?;
            let plain = unstamp(&projected, stamp)?;
            items.push(plain.clone());
            prev = plain;
        }
        Ok(InterpolationSequence::new(items))
    }

    /// Re-check the three contract entailments with fresh solver queries.
    /// Cheap at desk scale; used by the verification mode and after
    /// positivization repairs.
    pub fn verify_sequence(
        &mut self,
        conjuncts: &[Formula],
        seq: &InterpolationSequence,
    ) -> Result<(), SolverError> {
        let n = conjuncts.len();
        let items = seq.items();
        if items.len() != n - 1 {
            return Err(SolverError::InterpolantContract(format!(
                "expected {} elements, got {}",
                n - 1,
                items.len()
            )));
        }
        for (i, item) in items.iter().enumerate() {
            let lhs = if i == 0 {
                conjuncts[0].clone()
            } else {
                Formula::and_s(vec![
                    stamp_both(&items[i - 1], (i - 1) as u32),
                    conjuncts[i].clone(),
                ])
            };
            let rhs = stamp_both(item, i as u32);
            if !self.entails(&lhs, &rhs)? {
                return Err(SolverError::InterpolantContract(format!(
                    "inductiveness fails at position {}: {} does not entail {}",
                    i, lhs, rhs
                )));
            }
        }
        let last = Formula::and_s(vec![
            stamp_both(&items[n - 2], (n - 2) as u32),
            conjuncts[n - 1].clone(),
        ]);
        if self.check_sat(&last)?.is_sat() {
            return Err(SolverError::InterpolantContract(
                "final element does not refute the suffix".into(),
            ));
        }
        Ok(())
    }
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(SolverConfig::default())
    }
}

/// Stamp both states and data variables of an unstamped formula at `k`.
pub fn stamp_both(f: &Formula, k: u32) -> Formula {
    stamp_data(&stamp_states(f, k), k)
}

fn default_bind(nu: &mut Valuation, v: &Variable) {
    match v.sort() {
        Sort::Bool => {
            nu.set_bool(v.clone(), false);
        }
        Sort::Data => {
            nu.set_rat(v.clone(), BigRational::from_integer(0.into()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Formula, Term, Variable};

    fn x() -> Term {
        Term::var(Variable::data("x")).unwrap()
    }

    fn y() -> Term {
        Term::var(Variable::data("y")).unwrap()
    }

    fn q(name: &str) -> Formula {
        Formula::state(Variable::state(name)).unwrap()
    }

    #[test]
    fn trivial_verdicts() {
        let mut s = Solver::default();
        let sat = s.check_sat(&Formula::tt()).unwrap();
        assert!(sat.is_sat());
        if let SatResult::Sat(m) = sat {
            assert!(m.is_empty());
        }
        assert!(!s.check_sat(&Formula::ff()).unwrap().is_sat());
    }

    #[test]
    fn fig_one_first_step_is_unsat() {
        // x=0 ∧ y=0 ∧ x>y
        let f = Formula::and(vec![
            Formula::eq(x(), Term::int(0)),
            Formula::eq(y(), Term::int(0)),
            Formula::gt(x(), y()),
        ]);
        let mut s = Solver::default();
        assert!(!s.check_sat(&f).unwrap().is_sat());
    }

    #[test]
    fn strict_rational_witness() {
        // 0 < x ∧ x < 1 is satisfiable over rationals
        let f = Formula::and(vec![
            Formula::lt(Term::int(0), x()),
            Formula::lt(x(), Term::int(1)),
        ]);
        let mut s = Solver::default();
        let SatResult::Sat(m) = s.check_sat(&f).unwrap() else {
            panic!("expected sat");
        };
        let v = m.rat_of(&Variable::data("x")).unwrap();
        assert!(v > num::BigRational::from_integer(0.into()));
        assert!(v < num::BigRational::from_integer(1.into()));
    }

    #[test]
    fn entailment_examples() {
        let mut s = Solver::default();
        // (x=0 ∧ y=0) ⊨ y > x - 1
        let lhs = Formula::and(vec![
            Formula::eq(x(), Term::int(0)),
            Formula::eq(y(), Term::int(0)),
        ]);
        let rhs = Formula::gt(y(), x() - Term::int(1));
        assert!(s.entails(&lhs, &rhs).unwrap());
        // x>0 does not entail x>=1 over rationals
        let l = Formula::gt(x(), Term::int(0));
        let r = Formula::ge(x(), Term::int(1));
        assert!(!s.entails(&l, &r).unwrap());
        // reflexivity
        assert!(s.entails(&rhs, &rhs).unwrap());
    }

    #[test]
    fn bool_mix() {
        let mut s = Solver::default();
        let f = Formula::and(vec![
            Formula::or(vec![q("a"), q("b")]),
            Formula::not(&q("a")),
            Formula::implies(&q("b"), &Formula::le(x(), Term::int(3))),
            Formula::ge(x(), Term::int(5)),
        ]);
        assert!(!s.check_sat(&f).unwrap().is_sat());
        let g = Formula::and(vec![
            Formula::or(vec![q("a"), q("b")]),
            Formula::not(&q("a")),
            Formula::implies(&q("b"), &Formula::le(x(), Term::int(3))),
            Formula::ge(x(), Term::int(-5)),
        ]);
        let m = s.check_sat(&g).unwrap();
        assert!(m.is_sat());
    }

    #[test]
    fn interpolation_smoke() {
        // θ0 = q0@0, θ1 = q0@0 → (q1@1 ∧ x@1 = 0), θ2 = q1@1 → x@1 > 2
        let q0 = Formula::state(Variable::state("q0").at(0)).unwrap();
        let q1 = Formula::state(Variable::state("q1").at(1)).unwrap();
        let x1 = Term::var(Variable::data("x").at(1)).unwrap();
        let t0 = q0.clone();
        let t1 = Formula::implies(
            &q0,
            &Formula::and(vec![q1.clone(), Formula::eq(x1.clone(), Term::int(0))]),
        );
        let t2 = Formula::and(vec![
            Formula::implies(&q1, &Formula::gt(x1.clone(), Term::int(2))),
            Formula::implies(&q1, &Formula::ff()),
        ]);
        let mut s = Solver::new(SolverConfig {
            verify_interpolants: true,
            ..SolverConfig::default()
        });
        let seq = s.interpolate_sequence(&[t0, t1, t2]).unwrap();
        assert_eq!(seq.len(), 2);
    }

    #[test]
    fn interpolation_rejects_sat() {
        let t0 = q("p");
        let t1 = Formula::tt();
        let mut s = Solver::default();
        match s.interpolate_sequence(&[stamp_both(&t0, 0), t1]) {
            Err(SolverError::InterpolationOnSat(_)) => {}
            other => panic!("expected sat rejection, got {:?}", other.map(|s| s.items().to_vec())),
        }
    }

    #[test]
    fn exact_post_strategy_smoke() {
        let q0 = Formula::state(Variable::state("q0").at(0)).unwrap();
        let q1 = Formula::state(Variable::state("q1").at(1)).unwrap();
        let x1 = Term::var(Variable::data("x").at(1)).unwrap();
        let t0 = q0.clone();
        let t1 = Formula::implies(
            &q0,
            &Formula::and(vec![q1.clone(), Formula::eq(x1.clone(), Term::int(0))]),
        );
        let t2 = Formula::implies(&q1, &Formula::gt(x1.clone(), Term::int(2)));
        let mut s = Solver::new(SolverConfig {
            strategy: InterpolationStrategy::ExactPost,
            verify_interpolants: true,
            ..SolverConfig::default()
        });
        let seq = s.interpolate_sequence(&[t0, t1, t2]).unwrap();
        assert_eq!(seq.len(), 2);
    }
}
