//! Ground evaluation of quantifier-free formulas under total valuations.

use std::collections::BTreeMap;

use num::BigRational;

use super::formula::{Formula, Kind, Rel};
use super::var::{Sort, Variable};
use super::LogicError;

/// A value of one of the two sorts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Rat(BigRational),
}

/// An assignment from variables to values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Valuation {
    map: BTreeMap<Variable, Value>,
}

impl Valuation {
    pub fn new() -> Self {
        Valuation::default()
    }

    pub fn set_bool(&mut self, v: Variable, b: bool) -> &mut Self {
        debug_assert_eq!(v.sort(), Sort::Bool);
        self.map.insert(v, Value::Bool(b));
        self
    }

    pub fn set_rat(&mut self, v: Variable, q: BigRational) -> &mut Self {
        debug_assert_eq!(v.sort(), Sort::Data);
        self.map.insert(v, Value::Rat(q));
        self
    }

    pub fn set(&mut self, v: Variable, val: Value) -> &mut Self {
        self.map.insert(v, val);
        self
    }

    pub fn get(&self, v: &Variable) -> Option<&Value> {
        self.map.get(v)
    }

    pub fn bool_of(&self, v: &Variable) -> Option<bool> {
        match self.map.get(v) {
            Some(Value::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn rat_of(&self, v: &Variable) -> Option<BigRational> {
        match self.map.get(v) {
            Some(Value::Rat(q)) => Some(q.clone()),
            _ => None,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Value)> {
        self.map.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn merged(mut self, other: &Valuation) -> Valuation {
        for (v, x) in other.iter() {
            self.map.insert(v.clone(), x.clone());
        }
        self
    }
}

impl FromIterator<(Variable, Value)> for Valuation {
    fn from_iter<T: IntoIterator<Item = (Variable, Value)>>(iter: T) -> Self {
        Valuation {
            map: iter.into_iter().collect(),
        }
    }
}

/// Standard semantics over the rationals; `ν` must be total on the free
/// variables of `f` and `f` must be quantifier-free.
pub fn evaluate_ground(f: &Formula, nu: &Valuation) -> Result<bool, LogicError> {
    match f.kind() {
        Kind::True => Ok(true),
        Kind::False => Ok(false),
        Kind::State(v) => nu
            .bool_of(v)
            .ok_or_else(|| LogicError::MissingBinding(v.to_string())),
        Kind::Atom(a) => {
            let lhs = a.expr().evaluate(&|v| nu.rat_of(v))?;
            Ok(match a.rel() {
                Rel::Le => lhs <= *a.rhs(),
                Rel::Lt => lhs < *a.rhs(),
                Rel::Eq => lhs == *a.rhs(),
            })
        }
        Kind::Not(inner) => Ok(!evaluate_ground(inner, nu)?),
        Kind::And(fs) => {
            for c in fs.iter() {
                if !evaluate_ground(c, nu)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Kind::Or(fs) => {
            for c in fs.iter() {
                if evaluate_ground(c, nu)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Kind::Exists(..) => Err(LogicError::QuantifiedEval),
    }
}
