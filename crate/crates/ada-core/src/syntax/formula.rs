//! S-expression formula parser.
//!
//! Grammar, shared across the automaton format, debug dumps and the CLI:
//!
//! ```text
//! φ ::= true | false | state
//!     | (and φ …) | (or φ …) | (not φ) | (exists (x …) φ)
//!     | (op t t)            op ∈ { = <= < >= > }
//! t ::= x | (pre x) | number | (+ t t …) | (- t t …) | (- t)
//!     | (* number t) | (* t number)
//! ```
//!
//! States are bare identifiers declared as such; `(pre x)` is the
//! previous value of data variable `x`; numbers are integers, fractions
//! `n/d` or decimals.

use std::collections::BTreeMap;

use num::BigRational;

use crate::logic::{Formula, Rel, Sort, Term, Variable};

use super::lexer::{Lexer, Pos, Token};
use super::{ParseError, ParseErrorKind};

const MAX_DEPTH: u32 = 400;

/// Name resolution for bare identifiers.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    entries: BTreeMap<String, Variable>,
}

impl SymbolTable {
    pub fn new(vars: &[Variable], states: &[Variable]) -> Self {
        let mut entries = BTreeMap::new();
        for v in vars.iter().chain(states.iter()) {
            entries.insert(v.name().to_string(), v.clone());
        }
        SymbolTable { entries }
    }

    fn lookup(&self, name: &str) -> Option<&Variable> {
        self.entries.get(name)
    }

    fn with_binders(&self, binders: &[Variable]) -> SymbolTable {
        let mut entries = self.entries.clone();
        for b in binders {
            entries.insert(b.name().to_string(), b.clone());
        }
        SymbolTable { entries }
    }
}

fn err(kind: ParseErrorKind, pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError {
        kind,
        line: pos.line,
        col: pos.col,
        message: message.into(),
    }
}

/// Parsed s-expression tree, the intermediate form.
#[derive(Debug, Clone)]
pub enum Sexp {
    Sym(String, Pos),
    Num(BigRational, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Sym(_, p) | Sexp::Num(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

pub fn read_sexp(lx: &mut Lexer) -> Result<Sexp, ParseError> {
    read_sexp_depth(lx, 0)
}

fn read_sexp_depth(lx: &mut Lexer, depth: u32) -> Result<Sexp, ParseError> {
    if depth > MAX_DEPTH {
        return Err(err(
            ParseErrorKind::Syntax,
            lx.pos,
            "expression nests too deeply",
        ));
    }
    let Some((tok, pos)) = lx.next_token()? else {
        return Err(err(
            ParseErrorKind::Syntax,
            lx.pos,
            "unexpected end of input",
        ));
    };
    match tok {
        Token::Sym(s) => Ok(Sexp::Sym(s, pos)),
        Token::Num(q) => Ok(Sexp::Num(q, pos)),
        Token::RParen => Err(err(ParseErrorKind::Syntax, pos, "unexpected `)`")),
        Token::LParen => read_list_tail(lx, pos, depth + 1),
    }
}

fn read_list_tail(lx: &mut Lexer, open: Pos, depth: u32) -> Result<Sexp, ParseError> {
    if depth > MAX_DEPTH {
        return Err(err(
            ParseErrorKind::Syntax,
            open,
            "expression nests too deeply",
        ));
    }
    let mut items = Vec::new();
    loop {
        lx.skip_trivia();
        let save = lx.pos;
        let Some((tok, tpos)) = lx.next_token()? else {
            return Err(err(ParseErrorKind::Syntax, save, "unclosed `(`"));
        };
        match tok {
            Token::RParen => break,
            Token::LParen => items.push(read_list_tail(lx, tpos, depth + 1)?),
            Token::Sym(s) => items.push(Sexp::Sym(s, tpos)),
            Token::Num(q) => items.push(Sexp::Num(q, tpos)),
        }
    }
    Ok(Sexp::List(items, open))
}

/// Parse a complete formula string against a symbol table.
pub fn parse_formula(src: &str, table: &SymbolTable) -> Result<Formula, ParseError> {
    let mut lx = Lexer::new(src);
    let sexp = read_sexp(&mut lx)?;
    lx.skip_trivia();
    if let Some((_, pos)) = lx.next_token()? {
        return Err(err(
            ParseErrorKind::Syntax,
            pos,
            "trailing input after formula",
        ));
    }
    formula_of_sexp(&sexp, table, 0)
}

pub fn formula_of_sexp(
    sexp: &Sexp,
    table: &SymbolTable,
    depth: u32,
) -> Result<Formula, ParseError> {
    if depth > MAX_DEPTH {
        return Err(err(
            ParseErrorKind::Syntax,
            sexp.pos(),
            "formula nests too deeply",
        ));
    }
    match sexp {
        Sexp::Num(_, p) => Err(err(
            ParseErrorKind::Sort,
            *p,
            "a number is not a formula",
        )),
        Sexp::Sym(s, p) => match s.as_str() {
            "true" => Ok(Formula::tt()),
            "false" => Ok(Formula::ff()),
            name => match table.lookup(name) {
                Some(v) if v.sort() == Sort::Bool => {
                    Ok(Formula::state(v.clone()).expect("bool var"))
                }
                Some(_) => Err(err(
                    ParseErrorKind::Sort,
                    *p,
                    format!("data variable {} used as a formula", name),
                )),
                None => Err(err(
                    ParseErrorKind::Sort,
                    *p,
                    format!("unknown identifier {}", name),
                )),
            },
        },
        Sexp::List(items, p) => {
            let Some(head) = items.first() else {
                return Err(err(ParseErrorKind::Syntax, *p, "empty list"));
            };
            let Sexp::Sym(op, _) = head else {
                return Err(err(
                    ParseErrorKind::Syntax,
                    head.pos(),
                    "expected an operator",
                ));
            };
            match op.as_str() {
                "and" | "or" => {
                    let parts = items[1..]
                        .iter()
                        .map(|s| formula_of_sexp(s, table, depth + 1))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(if op == "and" {
                        Formula::and(parts)
                    } else {
                        Formula::or(parts)
                    })
                }
                "not" => {
                    if items.len() != 2 {
                        return Err(err(
                            ParseErrorKind::Syntax,
                            *p,
                            "not takes exactly one argument",
                        ));
                    }
                    Ok(Formula::not(&formula_of_sexp(&items[1], table, depth + 1)?))
                }
                "exists" => {
                    if items.len() != 3 {
                        return Err(err(
                            ParseErrorKind::Syntax,
                            *p,
                            "exists takes a binder list and a body",
                        ));
                    }
                    let Sexp::List(binder_items, bp) = &items[1] else {
                        return Err(err(
                            ParseErrorKind::Syntax,
                            items[1].pos(),
                            "exists binders must be a list",
                        ));
                    };
                    if binder_items.is_empty() {
                        return Err(err(ParseErrorKind::Syntax, *bp, "empty binder list"));
                    }
                    let mut binders = Vec::new();
                    for b in binder_items {
                        let Sexp::Sym(name, bpos) = b else {
                            return Err(err(
                                ParseErrorKind::Syntax,
                                b.pos(),
                                "binder must be an identifier",
                            ));
                        };
                        if let Some(v) = table.lookup(name) {
                            if v.sort() == Sort::Bool {
                                return Err(err(
                                    ParseErrorKind::Sort,
                                    *bpos,
                                    format!("binder {} shadows a state", name),
                                ));
                            }
                        }
                        binders.push(Variable::data(name));
                    }
                    let inner = table.with_binders(&binders);
                    let body = formula_of_sexp(&items[2], &inner, depth + 1)?;
                    Ok(Formula::exists(binders, body))
                }
                "=" | "<=" | "<" | ">=" | ">" => {
                    if items.len() != 3 {
                        return Err(err(
                            ParseErrorKind::Syntax,
                            *p,
                            format!("{} takes exactly two arguments", op),
                        ));
                    }
                    let lhs = term_of_sexp(&items[1], table, depth + 1)?;
                    let rhs = term_of_sexp(&items[2], table, depth + 1)?;
                    Ok(match op.as_str() {
                        "=" => Formula::atom(lhs, Rel::Eq, rhs),
                        "<=" => Formula::atom(lhs, Rel::Le, rhs),
                        "<" => Formula::atom(lhs, Rel::Lt, rhs),
                        ">=" => Formula::ge(lhs, rhs),
                        ">" => Formula::gt(lhs, rhs),
                        _ => unreachable!(),
                    })
                }
                other => Err(err(
                    ParseErrorKind::Syntax,
                    head.pos(),
                    format!("unknown operator {}", other),
                )),
            }
        }
    }
}

fn term_of_sexp(sexp: &Sexp, table: &SymbolTable, depth: u32) -> Result<Term, ParseError> {
    if depth > MAX_DEPTH {
        return Err(err(
            ParseErrorKind::Syntax,
            sexp.pos(),
            "term nests too deeply",
        ));
    }
    match sexp {
        Sexp::Num(q, _) => Ok(Term::constant(q.clone())),
        Sexp::Sym(name, p) => match table.lookup(name) {
            Some(v) if v.sort() == Sort::Data => Ok(Term::var(v.clone()).expect("data var")),
            Some(_) => Err(err(
                ParseErrorKind::Sort,
                *p,
                format!("state {} used as a term", name),
            )),
            None => Err(err(
                ParseErrorKind::Sort,
                *p,
                format!("unknown identifier {}", name),
            )),
        },
        Sexp::List(items, p) => {
            let Some(Sexp::Sym(op, oppos)) = items.first() else {
                return Err(err(ParseErrorKind::Syntax, *p, "expected a term operator"));
            };
            match op.as_str() {
                "pre" => {
                    if items.len() != 2 {
                        return Err(err(
                            ParseErrorKind::Syntax,
                            *p,
                            "pre takes exactly one variable",
                        ));
                    }
                    let Sexp::Sym(name, vp) = &items[1] else {
                        return Err(err(
                            ParseErrorKind::Syntax,
                            items[1].pos(),
                            "pre takes a variable name",
                        ));
                    };
                    match table.lookup(name) {
                        Some(v) if v.sort() == Sort::Data && v.is_plain() => {
                            Ok(Term::var(v.as_prev()).expect("data var"))
                        }
                        Some(_) => Err(err(
                            ParseErrorKind::Sort,
                            *vp,
                            format!("pre applies to data variables, not {}", name),
                        )),
                        None => Err(err(
                            ParseErrorKind::Sort,
                            *vp,
                            format!("unknown identifier {}", name),
                        )),
                    }
                }
                "+" => {
                    if items.len() < 3 {
                        return Err(err(
                            ParseErrorKind::Syntax,
                            *p,
                            "+ takes at least two arguments",
                        ));
                    }
                    let mut acc = Term::zero();
                    for item in &items[1..] {
                        acc = acc + term_of_sexp(item, table, depth + 1)?;
                    }
                    Ok(acc)
                }
                "-" => {
                    if items.len() < 2 {
                        return Err(err(
                            ParseErrorKind::Syntax,
                            *p,
                            "- takes at least one argument",
                        ));
                    }
                    let first = term_of_sexp(&items[1], table, depth + 1)?;
                    if items.len() == 2 {
                        return Ok(-first);
                    }
                    let mut acc = first;
                    for item in &items[2..] {
                        acc = acc - term_of_sexp(item, table, depth + 1)?;
                    }
                    Ok(acc)
                }
                "*" => {
                    if items.len() != 3 {
                        return Err(err(
                            ParseErrorKind::Syntax,
                            *p,
                            "* takes exactly two arguments",
                        ));
                    }
                    let lhs = term_of_sexp(&items[1], table, depth + 1)?;
                    let rhs = term_of_sexp(&items[2], table, depth + 1)?;
                    match (lhs.is_constant(), rhs.is_constant()) {
                        (true, _) => Ok(rhs.scale(lhs.constant_part())),
                        (_, true) => Ok(lhs.scale(rhs.constant_part())),
                        _ => Err(err(
                            ParseErrorKind::Sort,
                            *oppos,
                            "multiplication needs a constant factor (linear terms only)",
                        )),
                    }
                }
                other => Err(err(
                    ParseErrorKind::Syntax,
                    *oppos,
                    format!("unknown term operator {}", other),
                )),
            }
        }
    }
}
