//! Alternating data automata over a linear rational arithmetic data theory.
//!
//! An automaton reads words of (event, data valuation) pairs; its transition
//! rules are positive boolean/data formulas relating previous and current
//! values of the data variables. This crate provides:
//!
//! - linear-time boolean closure (union, intersection, complement) and
//!   concrete-word membership ([`automaton`]),
//! - two interpolation-based emptiness semi-algorithms: lazy predicate
//!   abstraction ([`predabs`]) and in-place label strengthening
//!   ([`impact`]),
//! - the embedded satisfiability and sequence-interpolation engine they
//!   run on ([`smt`]), and
//! - the textual automaton format, formula syntax and word files
//!   ([`syntax`]).

pub mod automaton;
pub mod bench;
pub mod impact;
pub mod logic;
pub mod predabs;
pub mod report;
pub mod smt;
pub mod symbolic;
pub mod syntax;

#[cfg(test)]
pub(crate) mod testfix;
