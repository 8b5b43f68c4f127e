//! Tokenizer shared by the formula and automaton parsers.

use num::{BigInt, BigRational};

use super::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    LParen,
    RParen,
    Sym(String),
    Num(BigRational),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Clone)]
pub struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pub pos: Pos,
}

fn is_sym_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_sym_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().peekable(),
            pos: Pos { line: 1, col: 1 },
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    pub fn peek_char(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    pub fn bump_char(&mut self) {
        self.bump();
    }

    pub fn skip_trivia(&mut self) {
        loop {
            match self.chars.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(&c) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    /// Next token, or `None` at end of input.
    pub fn next_token(&mut self) -> Result<Option<(Token, Pos)>, ParseError> {
        self.skip_trivia();
        let start = self.pos;
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        match c {
            '(' => {
                self.bump();
                Ok(Some((Token::LParen, start)))
            }
            ')' => {
                self.bump();
                Ok(Some((Token::RParen, start)))
            }
            c if is_sym_start(c) => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if is_sym_continue(c) {
                        s.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Ok(Some((Token::Sym(s), start)))
            }
            c if c.is_ascii_digit() || c == '-' => {
                let mut s = String::new();
                s.push(self.bump().unwrap());
                if s == "-" && !self.chars.peek().map_or(false, |c| c.is_ascii_digit()) {
                    // bare operator symbols: -, also allow <=, <, >=, >, =, +, *, /
                    return Ok(Some((Token::Sym(s), start)));
                }
                while let Some(&c) = self.chars.peek() {
                    if c.is_ascii_digit() || c == '/' || c == '.' {
                        s.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                let q = parse_rational(&s).ok_or_else(|| ParseError {
                    kind: ParseErrorKind::Lexical,
                    line: start.line,
                    col: start.col,
                    message: format!("malformed number {:?}", s),
                })?;
                Ok(Some((Token::Num(q), start)))
            }
            '<' | '>' | '=' | '+' | '*' | '/' => {
                let mut s = String::new();
                s.push(self.bump().unwrap());
                if (s == "<" || s == ">") && self.chars.peek() == Some(&'=') {
                    s.push(self.bump().unwrap());
                }
                Ok(Some((Token::Sym(s), start)))
            }
            other => Err(ParseError {
                kind: ParseErrorKind::Lexical,
                line: start.line,
                col: start.col,
                message: format!("unexpected character {:?}", other),
            }),
        }
    }
}

/// Exact rational from integer, fraction `n/d` or decimal notation.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    if body.is_empty() {
        return None;
    }
    let q = if let Some((n, d)) = body.split_once('/') {
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        if d == BigInt::from(0) {
            return None;
        }
        BigRational::new(n, d)
    } else if let Some((i, frac)) = body.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let scale = BigInt::from(10).pow(frac.len() as u32);
        let i: BigInt = if i.is_empty() { BigInt::from(0) } else { i.parse().ok()? };
        let f: BigInt = frac.parse().ok()?;
        BigRational::new(i * &scale + f, scale)
    } else {
        let n: BigInt = body.parse().ok()?;
        BigRational::from_integer(n)
    };
    Some(if neg { -q } else { q })
}
