//! General simplex for linear rational arithmetic, after the standard
//! incremental bound-propagation design: assignments always satisfy the
//! tableau rows, nonbasic variables always sit within their bounds, and
//! `check` repairs basic variables by pivoting with Bland's rule.
//!
//! Strict bounds are handled with delta-rationals `(r, d) = r + d·ε`.
//! Conflicts come back as the set of asserted bound tokens with their
//! Farkas multipliers.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigRational, One, Signed, Zero};

/// A rational extended with an infinitesimal component.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct QDelta {
    pub real: BigRational,
    pub delta: BigRational,
}

impl QDelta {
    pub fn real(r: BigRational) -> Self {
        QDelta {
            real: r,
            delta: BigRational::zero(),
        }
    }

    pub fn with_delta(r: BigRational, d: i32) -> Self {
        QDelta {
            real: r,
            delta: BigRational::from_integer(d.into()),
        }
    }

    fn add(&self, other: &QDelta) -> QDelta {
        QDelta {
            real: &self.real + &other.real,
            delta: &self.delta + &other.delta,
        }
    }

    fn sub(&self, other: &QDelta) -> QDelta {
        QDelta {
            real: &self.real - &other.real,
            delta: &self.delta - &other.delta,
        }
    }

    fn scale(&self, c: &BigRational) -> QDelta {
        QDelta {
            real: &self.real * c,
            delta: &self.delta * c,
        }
    }
}

impl fmt::Debug for QDelta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.delta.is_zero() {
            write!(f, "{}", self.real)
        } else {
            write!(f, "{}{:+}ε", self.real, self.delta)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Lower,
    Upper,
}

/// Opaque token identifying who asserted a bound; the SAT layer stores
/// literal indexes here.
pub type BoundTag = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SVar(pub u32);

#[derive(Clone)]
struct Bound {
    value: QDelta,
    tag: BoundTag,
}

struct VarState {
    lower: Option<Bound>,
    upper: Option<Bound>,
    value: QDelta,
    basic: bool,
}

/// A conflict: asserted bounds with positive Farkas multipliers whose
/// combination is infeasible.
#[derive(Debug, Clone)]
pub struct TheoryConflict {
    pub parts: Vec<(BoundTag, BigRational)>,
}

enum Undo {
    SetLower(SVar, Option<Bound>),
    SetUpper(SVar, Option<Bound>),
}

pub struct Simplex {
    vars: Vec<VarState>,
    /// `rows[b]`, present for basic `b`: `b = Σ coeff · nonbasic`.
    rows: BTreeMap<SVar, BTreeMap<SVar, BigRational>>,
    undo: Vec<Undo>,
    marks: Vec<usize>,
}

impl Simplex {
    pub fn new() -> Self {
        Simplex {
            vars: Vec::new(),
            rows: BTreeMap::new(),
            undo: Vec::new(),
            marks: Vec::new(),
        }
    }

    pub fn add_var(&mut self) -> SVar {
        let v = SVar(self.vars.len() as u32);
        self.vars.push(VarState {
            lower: None,
            upper: None,
            value: QDelta::real(BigRational::zero()),
            basic: false,
        });
        v
    }

    /// Add a slack variable defined as a linear combination of existing
    /// variables. Must be called before any bounds are asserted.
    pub fn add_slack(&mut self, definition: Vec<(SVar, BigRational)>) -> SVar {
        let s = self.add_var();
        // substitute definitions of basic variables so the row mentions
        // only nonbasic ones
        let mut row: BTreeMap<SVar, BigRational> = BTreeMap::new();
        for (v, c) in definition {
            if let Some(def) = self.rows.get(&v).cloned() {
                for (w, d) in def {
                    add_coeff(&mut row, w, &(&c * d));
                }
            } else {
                add_coeff(&mut row, v, &c);
            }
        }
        let mut value = QDelta::real(BigRational::zero());
        for (v, c) in &row {
            value = value.add(&self.vars[v.0 as usize].value.scale(c));
        }
        self.vars[s.0 as usize].basic = true;
        self.vars[s.0 as usize].value = value;
        self.rows.insert(s, row);
        s
    }

    pub fn push_mark(&mut self) {
        self.marks.push(self.undo.len());
    }

    pub fn pop_to_mark(&mut self, mark_count: usize) {
        while self.marks.len() > mark_count {
            let upto = self.marks.pop().unwrap();
            while self.undo.len() > upto {
                match self.undo.pop().unwrap() {
                    Undo::SetLower(v, old) => self.vars[v.0 as usize].lower = old,
                    Undo::SetUpper(v, old) => self.vars[v.0 as usize].upper = old,
                }
            }
        }
    }

    pub fn assert_bound(
        &mut self,
        v: SVar,
        kind: BoundKind,
        value: QDelta,
        tag: BoundTag,
    ) -> Result<(), TheoryConflict> {
        let state = &self.vars[v.0 as usize];
        match kind {
            BoundKind::Lower => {
                if let Some(ub) = &state.upper {
                    if value > ub.value {
                        return Err(TheoryConflict {
                            parts: vec![
                                (tag, BigRational::one()),
                                (ub.tag, BigRational::one()),
                            ],
                        });
                    }
                }
                if let Some(lb) = &state.lower {
                    if value <= lb.value {
                        return Ok(()); // existing bound at least as tight
                    }
                }
                self.undo
                    .push(Undo::SetLower(v, self.vars[v.0 as usize].lower.clone()));
                self.vars[v.0 as usize].lower = Some(Bound {
                    value: value.clone(),
                    tag,
                });
                if !self.vars[v.0 as usize].basic && self.vars[v.0 as usize].value < value {
                    self.update_nonbasic(v, value);
                }
            }
            BoundKind::Upper => {
                if let Some(lb) = &state.lower {
                    if value < lb.value {
                        return Err(TheoryConflict {
                            parts: vec![
                                (tag, BigRational::one()),
                                (lb.tag, BigRational::one()),
                            ],
                        });
                    }
                }
                if let Some(ub) = &state.upper {
                    if value >= ub.value {
                        return Ok(());
                    }
                }
                self.undo
                    .push(Undo::SetUpper(v, self.vars[v.0 as usize].upper.clone()));
                self.vars[v.0 as usize].upper = Some(Bound {
                    value: value.clone(),
                    tag,
                });
                if !self.vars[v.0 as usize].basic && self.vars[v.0 as usize].value > value {
                    self.update_nonbasic(v, value);
                }
            }
        }
        Ok(())
    }

    fn update_nonbasic(&mut self, v: SVar, new: QDelta) {
        let old = self.vars[v.0 as usize].value.clone();
        let diff = new.sub(&old);
        let updates: Vec<(usize, QDelta)> = self
            .rows
            .iter()
            .filter_map(|(b, row)| {
                row.get(&v).map(|c| {
                    (
                        b.0 as usize,
                        self.vars[b.0 as usize].value.add(&diff.scale(c)),
                    )
                })
            })
            .collect();
        for (idx, val) in updates {
            self.vars[idx].value = val;
        }
        self.vars[v.0 as usize].value = new;
    }

    fn violated_basic(&self) -> Option<(SVar, bool)> {
        // Bland: smallest index first; bool = violates lower
        for (i, st) in self.vars.iter().enumerate() {
            if !st.basic {
                continue;
            }
            if let Some(lb) = &st.lower {
                if st.value < lb.value {
                    return Some((SVar(i as u32), true));
                }
            }
            if let Some(ub) = &st.upper {
                if st.value > ub.value {
                    return Some((SVar(i as u32), false));
                }
            }
        }
        None
    }

    pub fn check(&mut self) -> Result<(), TheoryConflict> {
        loop {
            let Some((b, below)) = self.violated_basic() else {
                return Ok(());
            };
            let row = self.rows.get(&b).cloned().expect("basic row");
            let target = if below {
                self.vars[b.0 as usize].lower.as_ref().unwrap().value.clone()
            } else {
                self.vars[b.0 as usize].upper.as_ref().unwrap().value.clone()
            };
            // find entering variable (Bland: smallest index)
            let mut entering: Option<SVar> = None;
            for (v, c) in &row {
                let st = &self.vars[v.0 as usize];
                let can_move = if below == c.is_positive() {
                    // need v to increase
                    st.upper.as_ref().map_or(true, |u| st.value < u.value)
                } else {
                    // need v to decrease
                    st.lower.as_ref().map_or(true, |l| st.value > l.value)
                };
                if can_move {
                    entering = Some(*v);
                    break;
                }
            }
            let Some(j) = entering else {
                // stuck: every row variable is pinned at the blocking bound
                let mut parts = Vec::new();
                let own = if below {
                    self.vars[b.0 as usize].lower.as_ref().unwrap().tag
                } else {
                    self.vars[b.0 as usize].upper.as_ref().unwrap().tag
                };
                parts.push((own, BigRational::one()));
                for (v, c) in &row {
                    let st = &self.vars[v.0 as usize];
                    let blocking = if below == c.is_positive() {
                        st.upper.as_ref().expect("pinned").tag
                    } else {
                        st.lower.as_ref().expect("pinned").tag
                    };
                    parts.push((blocking, c.abs()));
                }
                return Err(TheoryConflict { parts });
            };
            self.pivot_and_update(b, j, target, &row);
        }
    }

    /// Pivot basic `b` with nonbasic `j` and set `b`'s value to `target`.
    fn pivot_and_update(
        &mut self,
        b: SVar,
        j: SVar,
        target: QDelta,
        row: &BTreeMap<SVar, BigRational>,
    ) {
        let a = row.get(&j).expect("entering in row").clone();
        let theta = target
            .sub(&self.vars[b.0 as usize].value)
            .scale(&a.recip());
        // update values
        let new_j = self.vars[j.0 as usize].value.add(&theta);
        self.vars[b.0 as usize].value = target;
        let updates: Vec<(usize, QDelta)> = self
            .rows
            .iter()
            .filter(|(r, _)| **r != b)
            .filter_map(|(r, rrow)| {
                rrow.get(&j).map(|c| {
                    (
                        r.0 as usize,
                        self.vars[r.0 as usize].value.add(&theta.scale(c)),
                    )
                })
            })
            .collect();
        for (idx, val) in updates {
            self.vars[idx].value = val;
        }
        self.vars[j.0 as usize].value = new_j;

        // rewrite the tableau: j becomes basic, b nonbasic
        // j = (b - Σ_{k≠j} a_k·k) / a
        let mut jrow: BTreeMap<SVar, BigRational> = BTreeMap::new();
        jrow.insert(b, a.recip());
        for (k, c) in row {
            if *k == j {
                continue;
            }
            add_coeff(&mut jrow, *k, &(-(c / &a)));
        }
        self.rows.remove(&b);
        // substitute j in every other row
        let other_rows: Vec<SVar> = self.rows.keys().cloned().collect();
        for r in other_rows {
            let rrow = self.rows.get_mut(&r).unwrap();
            if let Some(c) = rrow.remove(&j) {
                let mut updated = std::mem::take(rrow);
                for (k, d) in &jrow {
                    add_coeff(&mut updated, *k, &(&c * d));
                }
                *self.rows.get_mut(&r).unwrap() = updated;
            }
        }
        self.rows.insert(j, jrow);
        self.vars[b.0 as usize].basic = false;
        self.vars[j.0 as usize].basic = true;
    }

    /// Concrete rational values after a successful `check`: one shared ε
    /// small enough to honor every strict bound.
    pub fn concretize(&self) -> BTreeMap<SVar, BigRational> {
        let mut limit: Option<BigRational> = None;
        let mut consider = |value: &QDelta, bound: &QDelta, is_lower: bool| {
            // lower: value >= bound must survive; upper: value <= bound
            let (hi, lo) = if is_lower {
                (value, bound)
            } else {
                (bound, value)
            };
            let dreal = &hi.real - &lo.real;
            let ddelta = &hi.delta - &lo.delta;
            if ddelta.is_negative() && dreal.is_positive() {
                let cap = dreal / -ddelta;
                limit = Some(match limit.take() {
                    Some(l) if l < cap => l,
                    _ => cap,
                });
            }
        };
        for st in &self.vars {
            if let Some(lb) = &st.lower {
                consider(&st.value, &lb.value, true);
            }
            if let Some(ub) = &st.upper {
                consider(&st.value, &ub.value, false);
            }
        }
        let eps = match limit {
            Some(l) => {
                let one = BigRational::one();
                let half = l / BigRational::from_integer(2.into());
                if half < one {
                    half
                } else {
                    one
                }
            }
            None => BigRational::one(),
        };
        self.vars
            .iter()
            .enumerate()
            .map(|(i, st)| {
                (
                    SVar(i as u32),
                    &st.value.real + &st.value.delta * &eps,
                )
            })
            .collect()
    }
}

fn add_coeff(row: &mut BTreeMap<SVar, BigRational>, v: SVar, c: &BigRational) {
    use std::collections::btree_map::Entry;
    match row.entry(v) {
        Entry::Vacant(e) => {
            if !c.is_zero() {
                e.insert(c.clone());
            }
        }
        Entry::Occupied(mut e) => {
            *e.get_mut() += c;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}
