//! Surface syntax: s-expression formulas, the `.ada` automaton format and
//! tab-separated word files, with printers that round-trip.

mod document;
mod formula;
mod lexer;
mod word;

pub use document::{parse_automaton, print_automaton};
pub use formula::{parse_formula, SymbolTable};
pub use lexer::parse_rational;
pub use word::{parse_word, print_word};

use std::fmt;

use thiserror::Error;

/// Failure class, each distinctly coded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical,
    Syntax,
    Sort,
    Positivity,
}

#[derive(Debug, Clone, Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {} error: {}",
            self.line,
            self.col,
            match self.kind {
                ParseErrorKind::Lexical => "lexical",
                ParseErrorKind::Syntax => "syntax",
                ParseErrorKind::Sort => "sort",
                ParseErrorKind::Positivity => "positivity",
            },
            self.message
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::membership;
    use crate::logic::Variable;
    use crate::smt::Solver;

    const FIG: &str = include_str!("../../../../corpus/fig1.ada");

    #[test]
    fn parses_the_bundled_example() {
        let a = parse_automaton(FIG).unwrap();
        assert_eq!(a.states().len(), 5);
        assert_eq!(a.finals().len(), 2);
        assert_eq!(a.events(), ["a", "b"]);
        assert!(a.validate().is_empty());
        // the parsed automaton equals the programmatic fixture
        let fix = crate::testfix::lockstep_counters();
        assert_eq!(a.init(), fix.init());
        for q in fix.states() {
            for e in fix.events() {
                assert_eq!(a.rule(q, e), fix.rule(q, e), "rule ({}, {})", q, e);
            }
        }
    }

    #[test]
    fn print_parse_is_a_fixpoint() {
        let a = parse_automaton(FIG).unwrap();
        let printed = print_automaton(&a);
        let b = parse_automaton(&printed).unwrap();
        assert_eq!(print_automaton(&b), printed);
        assert_eq!(a.init(), b.init());
        assert_eq!(a.size(), b.size());
    }

    #[test]
    fn empty_rule_section_with_bottom_init_is_valid() {
        let src = "events: a\nvars: x\nstates: q\ninit: false\nfinal:\n";
        let a = parse_automaton(src).unwrap();
        assert!(a.validate().is_empty());
        assert_eq!(*a.rule(&Variable::state("q"), "a").unwrap(), crate::logic::Formula::ff());
    }

    #[test]
    fn negated_state_rule_is_a_positivity_error() {
        let src = "events: a\nvars: x\nstates: q1\ninit: q1\nfinal:\nrule q1 a (not q1)\n";
        let e = parse_automaton(src).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Positivity);
        assert!(e.message.contains("odd negations"), "{}", e.message);
    }

    #[test]
    fn init_with_data_variable_is_rejected() {
        let src = "events: a\nvars: x\nstates: q\ninit: (and q (= x 0))\nfinal:\n";
        let e = parse_automaton(src).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Sort);
    }

    #[test]
    fn unknown_identifier_is_a_sort_error() {
        let src = "events: a\nvars: x\nstates: q\ninit: zz\nfinal:\n";
        let e = parse_automaton(src).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Sort);
    }

    #[test]
    fn stray_character_is_a_lexical_error() {
        let src = "events: a\nvars: x\nstates: q\ninit: q\nfinal:\nrule q a (= x $)\n";
        let e = parse_automaton(src).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Lexical);
    }

    #[test]
    fn word_file_round_trips_and_is_rejected_by_the_example() {
        let a = parse_automaton(FIG).unwrap();
        let src = include_str!("../../../../corpus/fig2word.tsv");
        let w = parse_word(src, &a).unwrap();
        assert_eq!(w.len(), 3);
        let printed = print_word(&w, &a);
        let again = parse_word(&printed, &a).unwrap();
        assert_eq!(w, again);
        let mut s = Solver::default();
        assert!(!membership(&a, &w, &mut s).unwrap());
    }

    #[test]
    fn rationals_parse_in_all_three_notations() {
        let half = num::BigRational::new(1.into(), 2.into());
        assert_eq!(parse_rational("1/2"), Some(half.clone()));
        assert_eq!(parse_rational("0.5"), Some(half.clone()));
        assert_eq!(parse_rational("-3"), Some(-num::BigRational::from_integer(3.into())));
        assert_eq!(parse_rational("2/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn formulas_with_quantifiers_parse() {
        let a = parse_automaton(FIG).unwrap();
        let table = SymbolTable::new(a.vars(), a.states());
        let f = parse_formula("(exists (z) (and q1 (<= x z)))", &table).unwrap();
        assert!(!f.is_quantifier_free());
        assert!(f.is_positive());
    }
}
