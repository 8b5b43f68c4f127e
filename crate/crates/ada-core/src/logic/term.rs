//! Linear terms over data variables with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigRational, One, Zero};

use super::var::{Sort, Variable};
use super::LogicError;

/// A linear combination `c1*v1 + ... + cn*vn + k` of data variables.
///
/// Coefficients are exact rationals, variables are kept sorted and
/// zero coefficients are dropped, so equal terms compare equal.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Term {
    coeffs: BTreeMap<Variable, BigRational>,
    konst: BigRational,
}

impl Term {
    pub fn zero() -> Self {
        Term::default()
    }

    pub fn constant(k: BigRational) -> Self {
        Term {
            coeffs: BTreeMap::new(),
            konst: k,
        }
    }

    pub fn int(k: i64) -> Self {
        Self::constant(BigRational::from_integer(k.into()))
    }

    pub fn var(v: Variable) -> Result<Self, LogicError> {
        if v.sort() != Sort::Data {
            return Err(LogicError::SortMismatch {
                var: v.to_string(),
                expected: Sort::Data,
            });
        }
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, BigRational::one());
        Ok(Term {
            coeffs,
            konst: BigRational::zero(),
        })
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn constant_part(&self) -> &BigRational {
        &self.konst
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&Variable, &BigRational)> {
        self.coeffs.iter()
    }

    pub fn num_vars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff_of(&self, v: &Variable) -> BigRational {
        self.coeffs.get(v).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Variable> {
        self.coeffs.keys()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Term::zero();
        }
        Term {
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, k)| (v.clone(), k * c))
                .collect(),
            konst: &self.konst * c,
        }
    }

    fn add_scaled(&mut self, other: &Term, c: &BigRational) {
        for (v, k) in &other.coeffs {
            let entry = self
                .coeffs
                .entry(v.clone())
                .or_insert_with(BigRational::zero);
            *entry += k * c;
            if entry.is_zero() {
                self.coeffs.remove(v);
            }
        }
        self.konst += &other.konst * c;
    }

    /// Simultaneously replace variables by terms.
    pub fn substitute(&self, map: &BTreeMap<Variable, Term>) -> Self {
        let mut out = Term::constant(self.konst.clone());
        for (v, c) in &self.coeffs {
            match map.get(v) {
                Some(t) => out.add_scaled(t, c),
                None => {
                    let entry = out.coeffs.entry(v.clone()).or_insert_with(BigRational::zero);
                    *entry += c;
                    if entry.is_zero() {
                        out.coeffs.remove(v);
                    }
                }
            }
        }
        out
    }

    /// Evaluate under a total assignment of the term's variables.
    pub fn evaluate(
        &self,
        lookup: &impl Fn(&Variable) -> Option<BigRational>,
    ) -> Result<BigRational, LogicError> {
        let mut acc = self.konst.clone();
        for (v, c) in &self.coeffs {
            let val = lookup(v).ok_or_else(|| LogicError::MissingBinding(v.to_string()))?;
            acc += c * val;
        }
        Ok(acc)
    }
}

impl Add for Term {
    type Output = Term;
    fn add(mut self, rhs: Term) -> Term {
        self.add_scaled(&rhs, &BigRational::one());
        self
    }
}

impl Sub for Term {
    type Output = Term;
    fn sub(mut self, rhs: Term) -> Term {
        self.add_scaled(&rhs, &(-BigRational::one()));
        self
    }
}

impl Neg for Term {
    type Output = Term;
    fn neg(self) -> Term {
        self.scale(&(-BigRational::one()))
    }
}

impl Mul<BigRational> for Term {
    type Output = Term;
    fn mul(self, rhs: BigRational) -> Term {
        self.scale(&rhs)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (v, c) in &self.coeffs {
            if c.is_one() {
                parts.push(v.to_string());
            } else {
                let mut s = String::new();
                s.push_str("(* ");
                if c.is_integer() {
                    s.push_str(&c.numer().to_string());
                } else {
                    s.push_str(&format!("(/ {} {})", c.numer(), c.denom()));
                }
                s.push(' ');
                s.push_str(&v.to_string());
                s.push(')');
                parts.push(s);
            }
        }
        if !self.konst.is_zero() || parts.is_empty() {
            let mut s = String::new();
            if self.konst.is_integer() {
                s.push_str(&self.konst.numer().to_string());
            } else {
                s.push_str(&format!("(/ {} {})", self.konst.numer(), self.konst.denom()));
            }
            parts.push(s);
        }
        if parts.len() == 1 {
            write!(f, "{}", parts[0])
        } else {
            write!(f, "(+ {})", parts.join(" "))
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
