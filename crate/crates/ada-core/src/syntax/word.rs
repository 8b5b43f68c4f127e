//! Word files: one row per symbol, tab separated, first column the event,
//! remaining columns the rational values of the automaton's variables in
//! declaration order.

use std::collections::BTreeMap;

use num::BigRational;

use crate::automaton::{Automaton, DataWord, WordStep};

use super::lexer::parse_rational;
use super::{ParseError, ParseErrorKind};

pub fn parse_word(src: &str, a: &Automaton) -> Result<DataWord, ParseError> {
    let mut steps = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split_whitespace();
        let event = cols.next().expect("nonempty line").to_string();
        if !a.events().contains(&event) {
            return Err(ParseError {
                kind: ParseErrorKind::Sort,
                line: i as u32 + 1,
                col: 1,
                message: format!("event {} is not in the alphabet", event),
            });
        }
        let mut values: BTreeMap<_, BigRational> = BTreeMap::new();
        for v in a.vars() {
            let Some(cell) = cols.next() else {
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax,
                    line: i as u32 + 1,
                    col: 1,
                    message: format!("missing value for variable {}", v),
                });
            };
            let Some(q) = parse_rational(cell) else {
                return Err(ParseError {
                    kind: ParseErrorKind::Lexical,
                    line: i as u32 + 1,
                    col: 1,
                    message: format!("malformed number {:?}", cell),
                });
            };
            values.insert(v.clone(), q);
        }
        if let Some(extra) = cols.next() {
            return Err(ParseError {
                kind: ParseErrorKind::Syntax,
                line: i as u32 + 1,
                col: 1,
                message: format!("trailing column {:?}", extra),
            });
        }
        steps.push(WordStep { event, values });
    }
    Ok(DataWord { steps })
}

pub fn print_word(w: &DataWord, a: &Automaton) -> String {
    let mut out = String::new();
    for step in &w.steps {
        out.push_str(&step.event);
        for v in a.vars() {
            out.push('\t');
            match step.values.get(v) {
                Some(q) if q.is_integer() => out.push_str(&q.numer().to_string()),
                Some(q) => out.push_str(&format!("{}/{}", q.numer(), q.denom())),
                None => out.push('0'),
            }
        }
        out.push('\n');
    }
    out
}
