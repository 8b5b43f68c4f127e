//! Disjunctive normal form and Fourier–Motzkin projection.
//!
//! This is the exact-projection backend: boolean structure is expanded into
//! cubes, equalities are used as definitions (Gaussian substitution) and the
//! remaining bounds are combined pairwise to eliminate data variables. Used
//! by the exact-post interpolation strategy and by interpolant
//! positivization; the hot search path never calls it.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigRational, Signed, Zero};

use crate::logic::{Formula, Rel, Term, Variable};

use super::preprocess::{preprocess, NForm};
use super::SolverError;

const MAX_CUBES: usize = 200_000;

/// A conjunction of boolean literals and linear constraints.
#[derive(Debug, Clone, Default)]
pub struct Cube {
    pub bools: BTreeMap<Variable, bool>,
    pub cons: Vec<LinCon>,
}

/// `expr rel rhs` with `expr` free of constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinCon {
    pub expr: Term,
    pub rel: Rel,
    pub rhs: BigRational,
}

impl LinCon {
    fn from_atom(f: &Formula, pos: bool) -> Option<Vec<LinCon>> {
        let crate::logic::Kind::Atom(a) = f.kind() else {
            return None;
        };
        let minus = |t: &Term| t.clone().scale(&-BigRational::from_integer(1.into()));
        Some(match (a.rel(), pos) {
            (Rel::Le, true) | (Rel::Lt, true) | (Rel::Eq, true) => vec![LinCon {
                expr: a.expr().clone(),
                rel: a.rel(),
                rhs: a.rhs().clone(),
            }],
            // ¬(e ≤ c): e > c i.e. -e < -c
            (Rel::Le, false) => vec![LinCon {
                expr: minus(a.expr()),
                rel: Rel::Lt,
                rhs: -a.rhs().clone(),
            }],
            // ¬(e < c): e ≥ c i.e. -e ≤ -c
            (Rel::Lt, false) => vec![LinCon {
                expr: minus(a.expr()),
                rel: Rel::Le,
                rhs: -a.rhs().clone(),
            }],
            (Rel::Eq, false) => unreachable!("split by preprocessing"),
        })
    }

    /// Ground truth value, if constant.
    fn ground(&self) -> Option<bool> {
        if !self.expr.is_constant() {
            return None;
        }
        let zero = BigRational::zero();
        Some(match self.rel {
            Rel::Le => zero <= self.rhs,
            Rel::Lt => zero < self.rhs,
            Rel::Eq => self.rhs.is_zero(),
        })
    }
}

impl Cube {
    fn add_bool(&mut self, v: Variable, val: bool) -> bool {
        match self.bools.get(&v) {
            Some(&prev) if prev != val => false,
            _ => {
                self.bools.insert(v, val);
                true
            }
        }
    }

    fn add_con(&mut self, c: LinCon) -> bool {
        match c.ground() {
            Some(true) => true,
            Some(false) => false,
            None => {
                if !self.cons.contains(&c) {
                    self.cons.push(c);
                }
                true
            }
        }
    }
}

/// Expand a formula (quantifier-free after stripping positive existentials;
/// the stripped variables are reported for elimination) into cubes.
pub fn to_dnf(f: &Formula) -> Result<(Vec<Cube>, BTreeSet<Variable>), SolverError> {
    let prep = preprocess(f)?;
    let cubes = dnf(&prep.root)?;
    Ok((cubes, prep.ghosts))
}

fn dnf(nf: &NForm) -> Result<Vec<Cube>, SolverError> {
    match nf {
        NForm::True => Ok(vec![Cube::default()]),
        NForm::False => Ok(Vec::new()),
        NForm::Lit { atom, pos } => {
            let mut cube = Cube::default();
            let ok = match atom.kind() {
                crate::logic::Kind::State(v) => cube.add_bool(v.clone(), *pos),
                _ => LinCon::from_atom(atom, *pos)
                    .expect("literal atom")
                    .into_iter()
                    .all(|c| cube.add_con(c)),
            };
            Ok(if ok { vec![cube] } else { Vec::new() })
        }
        NForm::Or(parts) => {
            let mut out = Vec::new();
            for p in parts {
                out.extend(dnf(p)?);
                if out.len() > MAX_CUBES {
                    return Err(SolverError::ProjectionBlowup);
                }
            }
            Ok(out)
        }
        NForm::And(parts) => {
            let mut acc = vec![Cube::default()];
            for p in parts {
                let rhs = dnf(p)?;
                let mut next = Vec::new();
                for a in &acc {
                    for b in &rhs {
                        if let Some(m) = merge(a, b) {
                            next.push(m);
                        }
                        if next.len() > MAX_CUBES {
                            return Err(SolverError::ProjectionBlowup);
                        }
                    }
                }
                acc = next;
            }
            Ok(acc)
        }
    }
}

fn merge(a: &Cube, b: &Cube) -> Option<Cube> {
    let mut out = a.clone();
    for (v, val) in &b.bools {
        if !out.add_bool(v.clone(), *val) {
            return None;
        }
    }
    for c in &b.cons {
        if !out.add_con(c.clone()) {
            return None;
        }
    }
    Some(out)
}

/// Eliminate the given data variables from every cube.
pub fn eliminate_data(cubes: Vec<Cube>, vars: &BTreeSet<Variable>) -> Result<Vec<Cube>, SolverError> {
    let mut out = Vec::new();
    for cube in cubes {
        let mut cons = cube.cons;
        for v in vars {
            cons = eliminate_one(cons, v)?;
        }
        let mut reduced = Cube {
            bools: cube.bools,
            cons: Vec::new(),
        };
        let mut alive = true;
        for c in cons {
            if !reduced.add_con(c) {
                alive = false;
                break;
            }
        }
        if alive {
            out.push(reduced);
        }
    }
    Ok(out)
}

fn eliminate_one(cons: Vec<LinCon>, x: &Variable) -> Result<Vec<LinCon>, SolverError> {
    // use an equality as a definition of x when available
    if let Some(idx) = cons
        .iter()
        .position(|c| c.rel == Rel::Eq && !c.expr.coeff_of(x).is_zero())
    {
        let def = cons[idx].clone();
        let a = def.expr.coeff_of(x);
        // x = (rhs - rest)/a
        let rest = def.expr.clone() - Term::var(x.clone()).unwrap().scale(&a);
        let solution = (Term::constant(def.rhs.clone()) - rest).scale(&a.recip());
        let mut map = BTreeMap::new();
        map.insert(x.clone(), solution);
        let mut out = Vec::new();
        for (i, c) in cons.into_iter().enumerate() {
            if i == idx {
                continue;
            }
            let expr = c.expr.substitute(&map);
            out.push(normalize(expr, c.rel, c.rhs));
        }
        return Ok(out);
    }

    let mut lowers: Vec<(Term, bool)> = Vec::new(); // x ≥ term (strict?)
    let mut uppers: Vec<(Term, bool)> = Vec::new(); // x ≤ term (strict?)
    let mut rest = Vec::new();
    for c in cons {
        let a = c.expr.coeff_of(x);
        if a.is_zero() {
            rest.push(c);
            continue;
        }
        // a·x + r rel rhs  ⇒  x rel' (rhs - r)/a
        let r = c.expr.clone() - Term::var(x.clone()).unwrap().scale(&a);
        let bound = (Term::constant(c.rhs.clone()) - r).scale(&a.recip());
        let strict = c.rel == Rel::Lt;
        debug_assert!(c.rel != Rel::Eq);
        if a.is_positive() {
            uppers.push((bound, strict));
        } else {
            lowers.push((bound, strict));
        }
    }
    for (lo, ls) in &lowers {
        for (up, us) in &uppers {
            let rel = if *ls || *us { Rel::Lt } else { Rel::Le };
            let diff = lo.clone() - up.clone();
            let konst = diff.constant_part().clone();
            let expr = diff - Term::constant(konst.clone());
            rest.push(normalize(expr, rel, -konst));
            if rest.len() > MAX_CUBES {
                return Err(SolverError::ProjectionBlowup);
            }
        }
    }
    Ok(rest)
}

fn normalize(expr: Term, rel: Rel, rhs: BigRational) -> LinCon {
    // fold any constant drift back into the right-hand side
    let konst = expr.constant_part().clone();
    let expr = expr - Term::constant(konst.clone());
    LinCon {
        expr,
        rel,
        rhs: rhs - konst,
    }
}

/// Exact projection: keep only the given boolean and data variables,
/// dropping boolean literals over other variables and eliminating other
/// data variables by Fourier–Motzkin. Positive existentials inside `f` are
/// eliminated as well.
pub fn project(
    f: &Formula,
    keep: &impl Fn(&Variable) -> bool,
) -> Result<Formula, SolverError> {
    let (cubes, ghosts) = to_dnf(f)?;
    let mut elim: BTreeSet<Variable> = ghosts;
    for cube in &cubes {
        for c in &cube.cons {
            for v in c.expr.vars() {
                if !keep(v) {
                    elim.insert(v.clone());
                }
            }
        }
    }
    elim.retain(|v| !keep(v));
    let cubes = eliminate_data(cubes, &elim)?;
    let mut disjuncts = Vec::new();
    for cube in cubes {
        let mut parts: Vec<Formula> = Vec::new();
        for (v, val) in &cube.bools {
            if !keep(v) {
                continue;
            }
            let s = Formula::state(v.clone()).expect("bool var");
            parts.push(if *val { s } else { Formula::not(&s) });
        }
        for c in &cube.cons {
            parts.push(Formula::atom(
                c.expr.clone(),
                c.rel,
                Term::constant(c.rhs.clone()),
            ));
        }
        disjuncts.push(Formula::and_s(parts));
    }
    Ok(Formula::or_s(disjuncts))
}
