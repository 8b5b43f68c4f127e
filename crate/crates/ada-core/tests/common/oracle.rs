//! Independent satisfiability oracle: full disjunctive expansion followed
//! by plain Fourier–Motzkin elimination of every data variable. Written
//! against the formula interface only; it shares no code with the
//! solver's decision path.

use std::collections::BTreeMap;

use num::{BigRational, Signed, Zero};

use ada_core::logic::{Formula, Kind, Rel, Variable};

/// `Σ coeffs·v  (≤ | <)  bound`
#[derive(Debug, Clone)]
struct Ineq {
    coeffs: BTreeMap<Variable, BigRational>,
    strict: bool,
    bound: BigRational,
}

type Cube = (BTreeMap<Variable, bool>, Vec<Ineq>);

pub fn oracle_sat(f: &Formula) -> bool {
    cubes(f, true).iter().any(cube_feasible)
}

pub fn oracle_entails(lhs: &Formula, rhs: &Formula) -> bool {
    !oracle_sat(&Formula::and(vec![lhs.clone(), Formula::not(rhs)]))
}

fn atom_ineqs(f: &Formula, positive: bool) -> Vec<Vec<Ineq>> {
    // outer vec: disjunctive alternatives; inner: conjoined inequalities
    let Kind::Atom(a) = f.kind() else {
        panic!("atom expected");
    };
    let coeffs: BTreeMap<Variable, BigRational> =
        a.expr().coeffs().map(|(v, c)| (v.clone(), c.clone())).collect();
    let neg_coeffs: BTreeMap<Variable, BigRational> =
        coeffs.iter().map(|(v, c)| (v.clone(), -c.clone())).collect();
    let b = a.rhs().clone();
    let le = |strict: bool| Ineq {
        coeffs: coeffs.clone(),
        strict,
        bound: b.clone(),
    };
    let ge_as_le = |strict: bool| Ineq {
        coeffs: neg_coeffs.clone(),
        strict,
        bound: -b.clone(),
    };
    match (a.rel(), positive) {
        (Rel::Le, true) => vec![vec![le(false)]],
        (Rel::Le, false) => vec![vec![ge_as_le(true)]],
        (Rel::Lt, true) => vec![vec![le(true)]],
        (Rel::Lt, false) => vec![vec![ge_as_le(false)]],
        (Rel::Eq, true) => vec![vec![le(false), ge_as_le(false)]],
        (Rel::Eq, false) => vec![vec![le(true)], vec![ge_as_le(true)]],
    }
}

fn cubes(f: &Formula, positive: bool) -> Vec<Cube> {
    match f.kind() {
        Kind::True => {
            if positive {
                vec![(BTreeMap::new(), Vec::new())]
            } else {
                Vec::new()
            }
        }
        Kind::False => {
            if positive {
                Vec::new()
            } else {
                vec![(BTreeMap::new(), Vec::new())]
            }
        }
        Kind::State(v) => vec![(BTreeMap::from([(v.clone(), positive)]), Vec::new())],
        Kind::Atom(_) => atom_ineqs(f, positive)
            .into_iter()
            .map(|ineqs| (BTreeMap::new(), ineqs))
            .collect(),
        Kind::Not(inner) => cubes(inner, !positive),
        Kind::And(fs) if positive => product(fs.iter().map(|c| cubes(c, true))),
        Kind::And(fs) => fs.iter().flat_map(|c| cubes(c, false)).collect(),
        Kind::Or(fs) if positive => fs.iter().flat_map(|c| cubes(c, true)).collect(),
        Kind::Or(fs) => product(fs.iter().map(|c| cubes(c, false))),
        Kind::Exists(..) => panic!("the oracle handles quantifier-free formulas only"),
    }
}

fn product(parts: impl Iterator<Item = Vec<Cube>>) -> Vec<Cube> {
    let mut acc: Vec<Cube> = vec![(BTreeMap::new(), Vec::new())];
    for alternatives in parts {
        let mut next = Vec::new();
        for (bools, ineqs) in &acc {
            'alt: for (b2, i2) in &alternatives {
                let mut bools = bools.clone();
                for (v, val) in b2 {
                    if *bools.entry(v.clone()).or_insert(*val) != *val {
                        continue 'alt;
                    }
                }
                let mut ineqs = ineqs.clone();
                ineqs.extend(i2.iter().cloned());
                next.push((bools, ineqs));
            }
        }
        acc = next;
    }
    acc
}

fn cube_feasible(cube: &Cube) -> bool {
    let (_, ineqs) = cube;
    let mut system = ineqs.clone();
    loop {
        // ground inequalities must hold
        let mut rest = Vec::new();
        for iq in &system {
            if iq.coeffs.is_empty() {
                let zero = BigRational::zero();
                let ok = if iq.strict {
                    zero < iq.bound
                } else {
                    zero <= iq.bound
                };
                if !ok {
                    return false;
                }
            } else {
                rest.push(iq.clone());
            }
        }
        let Some(var) = rest.first().and_then(|iq| iq.coeffs.keys().next().cloned()) else {
            return true;
        };
        // eliminate var: combine every lower bound with every upper bound
        let mut lowers = Vec::new(); // var >= expr (as Ineq with var isolated)
        let mut uppers = Vec::new();
        let mut keep = Vec::new();
        for iq in rest {
            match iq.coeffs.get(&var).cloned() {
                None => keep.push(iq),
                Some(c) => {
                    // c·var + rest ≤ bound
                    let mut others = iq.coeffs.clone();
                    others.remove(&var);
                    if c.is_positive() {
                        uppers.push((others, c, iq.strict, iq.bound));
                    } else {
                        lowers.push((others, c, iq.strict, iq.bound));
                    }
                }
            }
        }
        for (lo_coeffs, lc, ls, lb) in &lowers {
            for (up_coeffs, uc, us, ub) in &uppers {
                // scale both so the var coefficient cancels: divide each by |c|
                let mut combined: BTreeMap<Variable, BigRational> = BTreeMap::new();
                let lscale = -lc.clone(); // positive
                for (v, c) in lo_coeffs {
                    *combined.entry(v.clone()).or_insert_with(BigRational::zero) +=
                        c / &lscale;
                }
                for (v, c) in up_coeffs {
                    *combined.entry(v.clone()).or_insert_with(BigRational::zero) += c / uc;
                }
                combined.retain(|_, c| !c.is_zero());
                keep.push(Ineq {
                    coeffs: combined,
                    strict: *ls || *us,
                    bound: lb / &lscale + ub / uc,
                });
            }
        }
        system = keep;
    }
}
