//! Sorted variables with optional time decorations.
//!
//! A variable is identified by its name, sort and decoration. The decoration
//! is either nothing, the previous-value marker (written `(pre x)` in the
//! surface syntax), or a non-negative time stamp `x@k` used internally when
//! unfolding runs. A variable never carries both a stamp and the marker.

use std::fmt;
use std::sync::Arc;

/// The two sorts of the combined theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Bool,
    Data,
}

/// Time decoration of a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Decor {
    /// Undecorated: the "current" value, or an unstamped state.
    Plain,
    /// Previous-value marker, only meaningful for data variables in
    /// transition formulas.
    Prev,
    /// Time stamp `k`, attached when unfolding a run.
    Stamp(u32),
}

/// A sorted, possibly decorated variable.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Variable {
    name: Arc<str>,
    sort: Sort,
    decor: Decor,
}

impl Variable {
    pub fn new(name: &str, sort: Sort, decor: Decor) -> Self {
        Variable {
            name: Arc::from(name),
            sort,
            decor,
        }
    }

    /// A plain data variable.
    pub fn data(name: &str) -> Self {
        Self::new(name, Sort::Data, Decor::Plain)
    }

    /// A plain boolean state variable.
    pub fn state(name: &str) -> Self {
        Self::new(name, Sort::Bool, Decor::Plain)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sort(&self) -> Sort {
        self.sort
    }

    pub fn decor(&self) -> Decor {
        self.decor
    }

    pub fn is_plain(&self) -> bool {
        self.decor == Decor::Plain
    }

    pub fn is_prev(&self) -> bool {
        self.decor == Decor::Prev
    }

    pub fn stamp(&self) -> Option<u32> {
        match self.decor {
            Decor::Stamp(k) => Some(k),
            _ => None,
        }
    }

    /// The same variable with the previous-value marker.
    pub fn as_prev(&self) -> Self {
        Variable {
            name: self.name.clone(),
            sort: self.sort,
            decor: Decor::Prev,
        }
    }

    /// The same variable carrying stamp `k`.
    pub fn at(&self, k: u32) -> Self {
        Variable {
            name: self.name.clone(),
            sort: self.sort,
            decor: Decor::Stamp(k),
        }
    }

    /// The same variable with no decoration.
    pub fn plain(&self) -> Self {
        Variable {
            name: self.name.clone(),
            sort: self.sort,
            decor: Decor::Plain,
        }
    }
}

impl PartialOrd for Variable {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Variable {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.name
            .cmp(&other.name)
            .then(self.decor.cmp(&other.decor))
            .then(self.sort.cmp(&other.sort))
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.decor {
            Decor::Plain => write!(f, "{}", self.name),
            Decor::Prev => write!(f, "(pre {})", self.name),
            Decor::Stamp(k) => write!(f, "{}@{}", self.name, k),
        }
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)?;
        if self.sort == Sort::Bool {
            write!(f, ":B")?;
        }
        Ok(())
    }
}
