//! The `.ada` textual automaton format.
//!
//! ```text
//! # comments run to end of line
//! events: a b
//! vars: x y
//! states: q0 q1 q2 q3 q4
//! init: q0
//! final: q3 q4
//! rule q0 a (and q1 q2 (= x 0) (= y 0))
//! rule q1 b (and q3 (>= (pre x) (pre y)))
//! ```
//!
//! Header lines come in the order shown; rules not listed default to
//! `false`. Formulas may span lines (they are balanced s-expressions).

use std::collections::{BTreeMap, BTreeSet};

use crate::automaton::{Automaton, DiagnosticCode};
use crate::logic::Variable;

use super::formula::{formula_of_sexp, read_sexp, SymbolTable};
use super::lexer::{Lexer, Pos, Token};
use super::{ParseError, ParseErrorKind};

fn err(kind: ParseErrorKind, pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError {
        kind,
        line: pos.line,
        col: pos.col,
        message: message.into(),
    }
}

struct DocLexer<'a> {
    lx: Lexer<'a>,
}

impl<'a> DocLexer<'a> {
    fn new(src: &'a str) -> Self {
        DocLexer {
            lx: Lexer::new(src),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<Pos, ParseError> {
        let pos = self.ident_or_keyword()?;
        match pos {
            Some((word, p)) if word == kw => Ok(p),
            Some((word, p)) => Err(err(
                ParseErrorKind::Syntax,
                p,
                format!("expected `{}:`, found `{}`", kw.trim_end_matches(':'), word),
            )),
            None => Err(err(
                ParseErrorKind::Syntax,
                self.lx.pos,
                format!("expected `{}`", kw),
            )),
        }
    }

    /// Read one `ident` or `ident:` word.
    fn ident_or_keyword(&mut self) -> Result<Option<(String, Pos)>, ParseError> {
        self.lx.skip_trivia();
        let start = self.lx.pos;
        let Some((tok, pos)) = self.lx.next_token()? else {
            return Ok(None);
        };
        let Token::Sym(mut s) = tok else {
            return Err(err(
                ParseErrorKind::Syntax,
                pos,
                "expected an identifier",
            ));
        };
        // a keyword is an identifier immediately followed by `:`
        if self.lx.pos.line == start.line && self.peek_char() == Some(':') {
            self.consume_char();
            s.push(':');
        }
        Ok(Some((s, pos)))
    }

    fn peek_char(&mut self) -> Option<char> {
        self.lx.peek_char()
    }

    fn consume_char(&mut self) {
        self.lx.bump_char();
    }

    /// Identifiers until end of the current line.
    fn idents_to_eol(&mut self) -> Result<Vec<(String, Pos)>, ParseError> {
        let mut out = Vec::new();
        loop {
            let line = self.lx.pos.line;
            let save = self.lx.clone();
            self.lx.skip_trivia();
            if self.lx.pos.line != line {
                self.lx = save;
                break;
            }
            let Some((tok, pos)) = self.lx.next_token()? else {
                break;
            };
            match tok {
                Token::Sym(s) => out.push((s, pos)),
                _ => {
                    return Err(err(
                        ParseErrorKind::Syntax,
                        pos,
                        "expected an identifier",
                    ))
                }
            }
        }
        Ok(out)
    }
}

/// Parse and validate an automaton document.
pub fn parse_automaton(src: &str) -> Result<Automaton, ParseError> {
    let mut doc = DocLexer::new(src);

    doc.expect_keyword("events:")?;
    let events: Vec<(String, Pos)> = doc.idents_to_eol()?;

    doc.expect_keyword("vars:")?;
    let vars: Vec<(String, Pos)> = doc.idents_to_eol()?;

    doc.expect_keyword("states:")?;
    let states: Vec<(String, Pos)> = doc.idents_to_eol()?;

    let var_list: Vec<Variable> = vars.iter().map(|(n, _)| Variable::data(n)).collect();
    let state_list: Vec<Variable> = states.iter().map(|(n, _)| Variable::state(n)).collect();
    let table = SymbolTable::new(&var_list, &state_list);

    let init_pos = doc.expect_keyword("init:")?;
    let init_sexp = read_sexp(&mut doc.lx)?;
    let init = formula_of_sexp(&init_sexp, &table, 0)?;

    doc.expect_keyword("final:")?;
    let finals: Vec<(String, Pos)> = doc.idents_to_eol()?;
    for (name, pos) in &finals {
        if !states.iter().any(|(s, _)| s == name) {
            return Err(err(
                ParseErrorKind::Sort,
                *pos,
                format!("final state {} is not declared", name),
            ));
        }
    }

    let mut rules: BTreeMap<(Variable, String), Formula0> = BTreeMap::new();
    let mut rule_pos: BTreeMap<(String, String), Pos> = BTreeMap::new();
    loop {
        let Some((word, pos)) = doc.ident_or_keyword()? else {
            break;
        };
        if word != "rule" {
            return Err(err(
                ParseErrorKind::Syntax,
                pos,
                format!("expected `rule`, found `{}`", word),
            ));
        }
        let Some((state_name, spos)) = doc.ident_or_keyword()? else {
            return Err(err(ParseErrorKind::Syntax, doc.lx.pos, "rule needs a state"));
        };
        let Some((event_name, epos)) = doc.ident_or_keyword()? else {
            return Err(err(ParseErrorKind::Syntax, doc.lx.pos, "rule needs an event"));
        };
        if !states.iter().any(|(s, _)| *s == state_name) {
            return Err(err(
                ParseErrorKind::Sort,
                spos,
                format!("rule source {} is not a declared state", state_name),
            ));
        }
        if !events.iter().any(|(e, _)| *e == event_name) {
            return Err(err(
                ParseErrorKind::Sort,
                epos,
                format!("rule event {} is not declared", event_name),
            ));
        }
        let body_sexp = read_sexp(&mut doc.lx)?;
        let body = formula_of_sexp(&body_sexp, &table, 0)?;
        let key = (Variable::state(&state_name), event_name.clone());
        if rules.insert(key, body).is_some() {
            return Err(err(
                ParseErrorKind::Syntax,
                pos,
                format!("duplicate rule ({}, {})", state_name, event_name),
            ));
        }
        rule_pos.insert((state_name, event_name), pos);
    }

    let automaton = Automaton::new(
        var_list,
        state_list,
        events.iter().map(|(e, _)| e.clone()).collect(),
        init,
        finals
            .iter()
            .map(|(n, _)| Variable::state(n))
            .collect::<BTreeSet<_>>(),
        rules,
    );

    let issues = automaton.validate();
    if let Some(first) = issues.first() {
        // map the diagnostic back to a source position where possible
        let pos = first
            .message
            .strip_prefix("rule (")
            .and_then(|rest| rest.split_once(')'))
            .and_then(|(inside, _)| inside.split_once(", "))
            .and_then(|(q, e)| rule_pos.get(&(q.to_string(), e.to_string())).copied())
            .unwrap_or(init_pos);
        let kind = match first.code {
            DiagnosticCode::NotPositive => ParseErrorKind::Positivity,
            DiagnosticCode::DuplicateName => ParseErrorKind::Syntax,
            _ => ParseErrorKind::Sort,
        };
        return Err(err(kind, pos, first.message.clone()));
    }
    Ok(automaton)
}

type Formula0 = crate::logic::Formula;

/// Canonical textual form; parsing it back yields the same automaton
/// (rules equal to `false` are omitted, matching the default).
pub fn print_automaton(a: &Automaton) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let join = |items: Vec<String>| items.join(" ");
    writeln!(out, "events: {}", join(a.events().to_vec())).unwrap();
    writeln!(
        out,
        "vars: {}",
        join(a.vars().iter().map(|v| v.name().to_string()).collect())
    )
    .unwrap();
    writeln!(
        out,
        "states: {}",
        join(a.states().iter().map(|q| q.name().to_string()).collect())
    )
    .unwrap();
    writeln!(out, "init: {}", a.init()).unwrap();
    writeln!(
        out,
        "final: {}",
        join(a.finals().iter().map(|q| q.name().to_string()).collect())
    )
    .unwrap();
    for q in a.states() {
        for e in a.events() {
            if let Some(body) = a.rule(q, e) {
                if *body == crate::logic::Formula::ff() {
                    continue;
                }
                writeln!(out, "rule {} {} {}", q.name(), e, body).unwrap();
            }
        }
    }
    out
}
