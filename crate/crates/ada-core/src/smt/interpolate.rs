//! Partial-interpolant bookkeeping for partitioned refutations.
//!
//! Every clause in a partitioned solve carries one partial interpolant per
//! cut between adjacent partitions. Input clauses project their shared
//! literals, theory lemmas contribute Farkas sums of their prefix-side
//! inequalities, and resolution combines with ∨ on prefix-local pivots and
//! ∧ otherwise. The final conflict's vector is the interpolation sequence.

use num::{BigRational, Zero};

use crate::logic::{Formula, Kind, Rel, Term};

/// Inequality view `expr ≤/< rhs` of an asserted theory literal.
#[derive(Debug, Clone)]
pub struct IneqView {
    pub expr: Term,
    pub strict: bool,
    pub rhs: BigRational,
}

impl IneqView {
    /// The inequality asserted by `atom` under `polarity`.
    pub fn of(atom: &Formula, polarity: bool) -> Option<IneqView> {
        let Kind::Atom(a) = atom.kind() else {
            return None;
        };
        let minus_one = -BigRational::from_integer(1.into());
        Some(match (a.rel(), polarity) {
            (Rel::Le, true) => IneqView {
                expr: a.expr().clone(),
                strict: false,
                rhs: a.rhs().clone(),
            },
            (Rel::Lt, true) => IneqView {
                expr: a.expr().clone(),
                strict: true,
                rhs: a.rhs().clone(),
            },
            // ¬(e ≤ c) is e > c, i.e. -e < -c
            (Rel::Le, false) => IneqView {
                expr: a.expr().clone().scale(&minus_one),
                strict: true,
                rhs: -a.rhs().clone(),
            },
            // ¬(e < c) is e ≥ c, i.e. -e ≤ -c
            (Rel::Lt, false) => IneqView {
                expr: a.expr().clone().scale(&minus_one),
                strict: false,
                rhs: -a.rhs().clone(),
            },
            (Rel::Eq, _) => return None, // eliminated by preprocessing
        })
    }
}

/// Nonnegative combination of inequalities, rendered back as a formula.
/// An empty combination is `⊤`; a combination whose variables cancel folds
/// to a constant through atom normalization.
pub fn farkas_sum<'a>(parts: impl Iterator<Item = (&'a IneqView, &'a BigRational)>) -> Formula {
    let mut expr = Term::zero();
    let mut rhs = BigRational::zero();
    let mut strict = false;
    let mut any = false;
    for (ineq, coeff) in parts {
        debug_assert!(!coeff.is_zero());
        expr = expr + ineq.expr.clone().scale(coeff);
        rhs += &ineq.rhs * coeff;
        strict |= ineq.strict;
        any = true;
    }
    if !any {
        return Formula::tt();
    }
    let rel = if strict { Rel::Lt } else { Rel::Le };
    Formula::atom(expr, rel, Term::constant(rhs))
}

/// Occurrence span of an atom across partitions; enough to classify
/// locality against any cut.
#[derive(Debug, Clone, Copy)]
pub struct PartSpan {
    pub min: u32,
    pub max: u32,
}

impl PartSpan {
    pub fn empty() -> Self {
        PartSpan {
            min: u32::MAX,
            max: 0,
        }
    }

    pub fn record(&mut self, p: u32) {
        self.min = self.min.min(p);
        self.max = self.max.max(p);
    }

    /// All occurrences within the prefix ending at `cut`.
    pub fn prefix_local(&self, cut: u32) -> bool {
        self.max <= cut
    }
}

/// Per-cut partial interpolants of one clause.
pub type ItpVec = Box<[Formula]>;

pub fn combine_on_pivot(cuts: usize, span: PartSpan, a: &ItpVec, b: &ItpVec) -> ItpVec {
    (0..cuts)
        .map(|i| {
            let (x, y) = (a[i].clone(), b[i].clone());
            if span.prefix_local(i as u32) {
                Formula::or_s(vec![x, y])
            } else {
                Formula::and_s(vec![x, y])
            }
        })
        .collect()
}
