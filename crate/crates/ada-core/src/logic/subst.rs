//! Capture-avoiding substitution, run rewriting and time stamping.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use super::formula::{Formula, Kind};
use super::term::Term;
use super::var::{Sort, Variable};
use super::LogicError;

/// Replacement image of a variable: a formula for boolean variables, a
/// term for data variables.
#[derive(Clone, Debug)]
pub enum Image {
    Fm(Formula),
    Tm(Term),
}

pub type Subst = BTreeMap<Variable, Image>;

static FRESH: AtomicU64 = AtomicU64::new(0);

/// A variable guaranteed never to collide with parsed names (the surface
/// syntax rejects `!`).
pub fn fresh_var(base: &Variable) -> Variable {
    let n = FRESH.fetch_add(1, Ordering::Relaxed);
    Variable::new(&format!("{}!{}", base.name(), n), base.sort(), base.decor())
}

fn image_free_in(img: &Image, v: &Variable) -> bool {
    match img {
        Image::Fm(f) => f.is_free(v),
        Image::Tm(t) => t.vars().any(|w| w == v),
    }
}

/// Simultaneous, capture-avoiding substitution.
///
/// Boolean variables may only be mapped to formulas and data variables only
/// to terms; quantified variables are renamed fresh when a replacement would
/// capture them.
pub fn substitute(f: &Formula, map: &Subst) -> Result<Formula, LogicError> {
    for (v, img) in map {
        match (v.sort(), img) {
            (Sort::Bool, Image::Fm(_)) | (Sort::Data, Image::Tm(_)) => {}
            _ => {
                return Err(LogicError::SortMismatch {
                    var: v.to_string(),
                    expected: v.sort(),
                })
            }
        }
    }
    apply(f, map)
}

fn apply(f: &Formula, map: &Subst) -> Result<Formula, LogicError> {
    // restrict to what actually occurs free
    if !map.keys().any(|v| f.is_free(v)) {
        return Ok(f.clone());
    }
    match f.kind() {
        Kind::True | Kind::False => Ok(f.clone()),
        Kind::State(v) => match map.get(v) {
            Some(Image::Fm(g)) => Ok(g.clone()),
            Some(Image::Tm(_)) => unreachable!("sort-checked"),
            None => Ok(f.clone()),
        },
        Kind::Atom(a) => {
            let term_map: BTreeMap<Variable, Term> = map
                .iter()
                .filter_map(|(v, img)| match img {
                    Image::Tm(t) => Some((v.clone(), t.clone())),
                    Image::Fm(_) => None,
                })
                .collect();
            let lhs = a.expr().substitute(&term_map);
            Ok(Formula::atom(lhs, a.rel(), Term::constant(a.rhs().clone())))
        }
        Kind::Not(inner) => Ok(Formula::not(&apply(inner, map)?)),
        Kind::And(fs) => {
            let children = fs
                .iter()
                .map(|c| apply(c, map))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Formula::and(children))
        }
        Kind::Or(fs) => {
            let children = fs
                .iter()
                .map(|c| apply(c, map))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Formula::or(children))
        }
        Kind::Exists(vs, body) => {
            // drop bindings shadowed by the quantifier
            let mut inner_map: Subst = map
                .iter()
                .filter(|(v, _)| !vs.contains(v))
                .map(|(v, i)| (v.clone(), i.clone()))
                .collect();
            // rename binders that a replacement image would capture
            let mut binders: Vec<Variable> = vs.to_vec();
            let mut renames: Subst = Subst::new();
            for b in binders.iter_mut() {
                let captured = inner_map
                    .iter()
                    .any(|(v, img)| body.is_free(v) && image_free_in(img, b));
                if captured {
                    let fresh = fresh_var(b);
                    let img = match b.sort() {
                        Sort::Bool => Image::Fm(Formula::state(fresh.clone())?),
                        Sort::Data => Image::Tm(Term::var(fresh.clone())?),
                    };
                    renames.insert(b.clone(), img);
                    *b = fresh;
                }
            }
            let body = if renames.is_empty() {
                body.clone()
            } else {
                apply(body, &renames)?
            };
            inner_map.retain(|v, _| body.is_free(v));
            let new_body = if inner_map.is_empty() {
                body
            } else {
                apply(&body, &inner_map)?
            };
            Ok(Formula::exists(binders, new_body))
        }
    }
}

/// Rename free variables through a total map; a thin wrapper over
/// [`substitute`] for stamping and unstamping.
pub fn rename_vars(
    f: &Formula,
    rename: &impl Fn(&Variable) -> Option<Variable>,
) -> Result<Formula, LogicError> {
    let mut map = Subst::new();
    for v in f.free_vars() {
        if let Some(w) = rename(&v) {
            if w != v {
                let img = match w.sort() {
                    Sort::Bool => Image::Fm(Formula::state(w)?),
                    Sort::Data => Image::Tm(Term::var(w)?),
                };
                map.insert(v, img);
            }
        }
    }
    substitute(f, &map)
}

/// Stamp every free plain state `q` as `q@k`.
pub fn stamp_states(f: &Formula, k: u32) -> Formula {
    rename_vars(f, &|v| {
        (v.sort() == Sort::Bool && v.is_plain()).then(|| v.at(k))
    })
    .expect("renaming cannot fail")
}

/// Stamp a transition formula for step `k+1` of a run: `x̄ ↦ x@k`,
/// `x ↦ x@(k+1)` on data variables.
pub fn stamp_rule_data(f: &Formula, k: u32) -> Formula {
    rename_vars(f, &|v| {
        if v.sort() != Sort::Data {
            return None;
        }
        match v.decor() {
            super::var::Decor::Prev => Some(v.plain().at(k)),
            super::var::Decor::Plain => Some(v.at(k + 1)),
            super::var::Decor::Stamp(_) => None,
        }
    })
    .expect("renaming cannot fail")
}

/// Stamp every free plain data variable `x` as `x@k`.
pub fn stamp_data(f: &Formula, k: u32) -> Formula {
    rename_vars(f, &|v| {
        (v.sort() == Sort::Data && v.is_plain()).then(|| v.at(k))
    })
    .expect("renaming cannot fail")
}

/// Replace every free plain data variable `x` by its previous-value
/// version `x̄`; the first step of building a post-image.
pub fn data_to_prev(f: &Formula) -> Formula {
    rename_vars(f, &|v| {
        (v.sort() == Sort::Data && v.is_plain()).then(|| v.as_prev())
    })
    .expect("renaming cannot fail")
}

/// Strip stamp `k` from every free variable carrying it; errors on any
/// other decoration or stamp.
pub fn unstamp(f: &Formula, k: u32) -> Result<Formula, LogicError> {
    for v in f.free_vars() {
        match v.decor() {
            super::var::Decor::Stamp(s) if s == k => {}
            super::var::Decor::Stamp(s) => {
                return Err(LogicError::UnexpectedStamp {
                    var: v.to_string(),
                    found: s,
                    expected: k,
                })
            }
            _ => {
                return Err(LogicError::UnexpectedStamp {
                    var: v.to_string(),
                    found: u32::MAX,
                    expected: k,
                })
            }
        }
    }
    rename_vars(f, &|v| (v.stamp() == Some(k)).then(|| v.plain()))
}

/// One run-rewriting step: replace each free plain state `q` of `f` by
/// `rules[q]` with its data variables stamped `x̄ ↦ x@k`, `x ↦ x@(k+1)`.
/// States missing from the table are treated as `⊥`.
pub fn rewrite_step(
    f: &Formula,
    rules: &BTreeMap<Variable, Formula>,
    k: u32,
) -> Formula {
    let mut map = Subst::new();
    for q in f.free_bools() {
        if !q.is_plain() {
            continue;
        }
        let img = match rules.get(q) {
            Some(rule) => stamp_rule_data(rule, k),
            None => Formula::ff(),
        };
        map.insert(q.clone(), Image::Fm(img));
    }
    substitute(f, &map).expect("state replacement is sort-correct")
}

/// Unstamped rewriting `Δ(φ, a)`: replace each free plain state by its
/// rule with `x̄`/`x` left in place.
pub fn rewrite_unstamped(f: &Formula, rules: &BTreeMap<Variable, Formula>) -> Formula {
    let mut map = Subst::new();
    for q in f.free_bools() {
        if !q.is_plain() {
            continue;
        }
        let img = rules.get(q).cloned().unwrap_or_else(Formula::ff);
        map.insert(q.clone(), Image::Fm(img));
    }
    substitute(f, &map).expect("state replacement is sort-correct")
}

/// Dualization: swaps conjunction with disjunction and negates non-state
/// atoms while leaving states fixed. Defined on quantifier-free members of
/// `Form+`; preserves size exactly and is an involution.
pub fn dualize(f: &Formula) -> Result<Formula, LogicError> {
    if !f.is_positive() {
        return Err(LogicError::NotPositive(
            f.negative_state()
                .map(|v| v.to_string())
                .unwrap_or_default(),
        ));
    }
    if !f.is_quantifier_free() {
        return Err(LogicError::QuantifiedDual);
    }
    fn dual(f: &Formula) -> Formula {
        match f.kind() {
            Kind::State(_) => f.clone(),
            Kind::True | Kind::False | Kind::Atom(_) => Formula::not(f),
            Kind::Not(inner) => Formula::not(&dual(inner)),
            Kind::And(fs) => Formula::or(fs.iter().map(dual).collect()),
            Kind::Or(fs) => Formula::and(fs.iter().map(dual).collect()),
            Kind::Exists(..) => unreachable!("checked quantifier-free"),
        }
    }
    Ok(dual(f))
}
