//! Repair of interpolation sequences into `Form+`.
//!
//! A sequence element with a negative state occurrence is replaced: the
//! first element by the seed of the unfolding, a later element by the exact
//! one-step successor of its (already positive) predecessor. Both
//! replacements keep the sequence a valid interpolant.

use crate::logic::Formula;

use super::{InterpolationSequence, SolverError};

/// Supplies the replacement formulas; implemented by the symbolic layer,
/// which knows the automaton's transition rules and the unfolding seed.
pub trait StepRepair {
    /// Replacement for a non-positive element at position 0: the seed
    /// formula of the unfolding (the initial configuration, or the pivot
    /// label).
    fn initial(&self) -> Formula;

    /// Replacement for a non-positive element at position `i > 0`: the
    /// exact successor of `prev` under the i-th event, quantifier-free and
    /// positive.
    fn step(&self, i: usize, prev: &Formula) -> Result<Formula, SolverError>;
}

pub fn positivize(
    seq: &InterpolationSequence,
    repair: &dyn StepRepair,
) -> Result<InterpolationSequence, SolverError> {
    let mut out: Vec<Formula> = Vec::with_capacity(seq.items().len());
    for (i, f) in seq.items().iter().enumerate() {
        if f.is_positive() {
            out.push(f.clone());
            continue;
        }
        let repaired = if i == 0 {
            repair.initial()
        } else {
            let prev = out[i - 1].clone();
            repair.step(i, &prev)?
        };
        if !repaired.is_positive() {
            return Err(SolverError::Internal(format!(
                "positivization produced a non-positive element: {}",
                repaired
            )));
        }
        out.push(repaired);
    }
    Ok(InterpolationSequence::new(out))
}
