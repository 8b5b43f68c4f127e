//! Solver-side normalization: negation normal form, existential stripping
//! by fresh renaming, and splitting of equalities into inequality pairs.

use std::collections::BTreeSet;

use num::BigRational;

use crate::logic::{
    fresh_var, substitute, Formula, Image, Kind, Rel, Subst, Term, Valuation, Variable,
};

use super::SolverError;

/// Negation-normal, quantifier-free, equality-free view of a formula.
/// Literals are interned atom formulas (boolean variables or `<=`/`<`
/// atoms) with a polarity.
#[derive(Debug, Clone)]
pub enum NForm {
    True,
    False,
    Lit { atom: Formula, pos: bool },
    And(Vec<NForm>),
    Or(Vec<NForm>),
}

pub struct Prep {
    pub root: NForm,
    /// Fresh variables introduced for stripped existentials. They may
    /// receive values in the internal model but are not part of the
    /// caller's formula.
    pub ghosts: BTreeSet<Variable>,
}

/// Split an equality atom into its `<=` half and its `>=` half (the latter
/// stored as `<=` over the negated expression).
fn split_eq(expr: &Term, rhs: &BigRational) -> (Formula, Formula) {
    let le = Formula::atom(expr.clone(), Rel::Le, Term::constant(rhs.clone()));
    let ge = Formula::atom(
        expr.clone().scale(&-BigRational::from_integer(1.into())),
        Rel::Le,
        Term::constant(-rhs.clone()),
    );
    (le, ge)
}

pub fn preprocess(f: &Formula) -> Result<Prep, SolverError> {
    let mut ghosts = BTreeSet::new();
    let root = nnf(f, true, &mut ghosts)?;
    Ok(Prep { root, ghosts })
}

fn nnf(f: &Formula, pos: bool, ghosts: &mut BTreeSet<Variable>) -> Result<NForm, SolverError> {
    match f.kind() {
        Kind::True => Ok(if pos { NForm::True } else { NForm::False }),
        Kind::False => Ok(if pos { NForm::False } else { NForm::True }),
        Kind::State(_) => Ok(NForm::Lit {
            atom: f.clone(),
            pos,
        }),
        Kind::Atom(a) => match a.rel() {
            Rel::Le | Rel::Lt => Ok(NForm::Lit {
                atom: f.clone(),
                pos,
            }),
            Rel::Eq => {
                let (le, ge) = split_eq(a.expr(), a.rhs());
                let le = NForm::Lit { atom: le, pos };
                let ge = NForm::Lit { atom: ge, pos };
                Ok(if pos {
                    NForm::And(vec![le, ge])
                } else {
                    NForm::Or(vec![le, ge])
                })
            }
        },
        Kind::Not(inner) => nnf(inner, !pos, ghosts),
        Kind::And(fs) => {
            let parts = fs
                .iter()
                .map(|c| nnf(c, pos, ghosts))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(if pos {
                NForm::And(parts)
            } else {
                NForm::Or(parts)
            })
        }
        Kind::Or(fs) => {
            let parts = fs
                .iter()
                .map(|c| nnf(c, pos, ghosts))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(if pos {
                NForm::Or(parts)
            } else {
                NForm::And(parts)
            })
        }
        Kind::Exists(vs, body) => {
            if !pos {
                return Err(SolverError::UniversalQuantifier);
            }
            let mut renames = Subst::new();
            for v in vs.iter() {
                let g = fresh_var(v);
                ghosts.insert(g.clone());
                let img = match v.sort() {
                    crate::logic::Sort::Bool => Image::Fm(Formula::state(g)?),
                    crate::logic::Sort::Data => Image::Tm(Term::var(g)?),
                };
                renames.insert(v.clone(), img);
            }
            let renamed = substitute(body, &renames)?;
            nnf(&renamed, true, ghosts)
        }
    }
}

impl NForm {
    /// Ground evaluation, used to double-check models.
    pub fn evaluate(&self, nu: &Valuation) -> Result<bool, SolverError> {
        match self {
            NForm::True => Ok(true),
            NForm::False => Ok(false),
            NForm::Lit { atom, pos } => {
                let v = crate::logic::evaluate_ground(atom, nu)?;
                Ok(v == *pos)
            }
            NForm::And(fs) => {
                for c in fs {
                    if !c.evaluate(nu)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            NForm::Or(fs) => {
                for c in fs {
                    if c.evaluate(nu)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    /// Free variables of the normalized form.
    pub fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        match self {
            NForm::True | NForm::False => {}
            NForm::Lit { atom, .. } => {
                out.extend(atom.free_vars());
            }
            NForm::And(fs) | NForm::Or(fs) => {
                for c in fs {
                    c.collect_vars(out);
                }
            }
        }
    }
}
