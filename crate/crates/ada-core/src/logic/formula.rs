//! Hash-consed formulas of the combined boolean + linear rational theory.
//!
//! Formula values are immutable and interned: building the same shape twice
//! yields the same shared node, so equality is pointer equality and each
//! node caches its hash, symbol count, free variables and the polarity of
//! every free boolean variable. The polarity cache is what makes membership
//! in `Form+` (every state under an even number of negations) a constant
//! time check.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use num::{BigRational, Signed, Zero};

use super::term::Term;
use super::var::{Sort, Variable};
use super::LogicError;

/// Comparison operator of a normalized atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Le,
    Lt,
    Eq,
}

/// A normalized linear atom `expr ▷ rhs`.
///
/// The expression carries no constant part (it is folded into `rhs`) and is
/// scaled so that its leading coefficient is `+1` or `-1` (`+1` for
/// equalities). `>=` and `>` atoms are stored as `<=` / `<` over the negated
/// expression, and `≈` is stored as `=`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    expr: Term,
    rel: Rel,
    rhs: BigRational,
}

impl Atom {
    pub fn expr(&self) -> &Term {
        &self.expr
    }

    pub fn rel(&self) -> Rel {
        self.rel
    }

    pub fn rhs(&self) -> &BigRational {
        &self.rhs
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.rel {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Eq => "=",
        };
        let rhs = if self.rhs.is_integer() {
            self.rhs.numer().to_string()
        } else {
            format!("(/ {} {})", self.rhs.numer(), self.rhs.denom())
        };
        write!(f, "({} {} {})", op, self.expr, rhs)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Polarity of the occurrences of a free boolean variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pol {
    Pos,
    Neg,
    Both,
}

impl Pol {
    fn flip(self) -> Pol {
        match self {
            Pol::Pos => Pol::Neg,
            Pol::Neg => Pol::Pos,
            Pol::Both => Pol::Both,
        }
    }

    fn join(self, other: Pol) -> Pol {
        if self == other {
            self
        } else {
            Pol::Both
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    True,
    False,
    State(Variable),
    Atom(Atom),
    Not(Formula),
    And(Box<[Formula]>),
    Or(Box<[Formula]>),
    Exists(Box<[Variable]>, Formula),
}

pub struct Node {
    id: u64,
    hash: u64,
    size: u64,
    kind: Kind,
    bool_pol: Arc<BTreeMap<Variable, Pol>>,
    data_fv: Arc<BTreeSet<Variable>>,
    has_quant: bool,
}

/// A shared, immutable formula.
#[derive(Clone)]
pub struct Formula(Arc<Node>);

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        // interning makes pointer identity sound
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for Formula {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Formula {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.id.cmp(&other.0.id)
    }
}

/// Interner key: shallow shape with child ids.
#[derive(PartialEq, Eq, Hash)]
enum Key {
    True,
    False,
    State(Variable),
    Atom(Atom),
    Not(u64),
    And(Vec<u64>),
    Or(Vec<u64>),
    Exists(Vec<Variable>, u64),
}

struct Interner {
    map: HashMap<Key, Formula>,
    next_id: u64,
}

fn interner() -> &'static Mutex<Interner> {
    static INTERNER: OnceLock<Mutex<Interner>> = OnceLock::new();
    INTERNER.get_or_init(|| {
        Mutex::new(Interner {
            map: HashMap::new(),
            next_id: 0,
        })
    })
}

fn shallow_key(kind: &Kind) -> Key {
    match kind {
        Kind::True => Key::True,
        Kind::False => Key::False,
        Kind::State(v) => Key::State(v.clone()),
        Kind::Atom(a) => Key::Atom(a.clone()),
        Kind::Not(f) => Key::Not(f.id()),
        Kind::And(fs) => Key::And(fs.iter().map(|f| f.id()).collect()),
        Kind::Or(fs) => Key::Or(fs.iter().map(|f| f.id()).collect()),
        Kind::Exists(vs, f) => Key::Exists(vs.to_vec(), f.id()),
    }
}

fn intern(kind: Kind) -> Formula {
    let key = shallow_key(&kind);
    let mut guard = interner().lock().unwrap();
    if let Some(f) = guard.map.get(&key) {
        return f.clone();
    }
    let id = guard.next_id;
    guard.next_id += 1;

    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    hash_kind(&kind, &mut hasher);
    let hash = hasher.finish();

    let (size, bool_pol, data_fv, has_quant) = analyze(&kind);
    let node = Node {
        id,
        hash,
        size,
        kind,
        bool_pol: Arc::new(bool_pol),
        data_fv: Arc::new(data_fv),
        has_quant,
    };
    let f = Formula(Arc::new(node));
    guard.map.insert(key, f.clone());
    f
}

fn hash_kind(kind: &Kind, h: &mut impl Hasher) {
    match kind {
        Kind::True => h.write_u8(0),
        Kind::False => h.write_u8(1),
        Kind::State(v) => {
            h.write_u8(2);
            v.hash(h);
        }
        Kind::Atom(a) => {
            h.write_u8(3);
            a.hash(h);
        }
        Kind::Not(f) => {
            h.write_u8(4);
            h.write_u64(f.0.hash);
        }
        Kind::And(fs) => {
            h.write_u8(5);
            for f in fs.iter() {
                h.write_u64(f.0.hash);
            }
        }
        Kind::Or(fs) => {
            h.write_u8(6);
            for f in fs.iter() {
                h.write_u64(f.0.hash);
            }
        }
        Kind::Exists(vs, f) => {
            h.write_u8(7);
            for v in vs.iter() {
                v.hash(h);
            }
            h.write_u64(f.0.hash);
        }
    }
}

type Analysis = (u64, BTreeMap<Variable, Pol>, BTreeSet<Variable>, bool);

fn analyze(kind: &Kind) -> Analysis {
    match kind {
        Kind::True | Kind::False => (1, BTreeMap::new(), BTreeSet::new(), false),
        Kind::State(v) => {
            let mut pol = BTreeMap::new();
            pol.insert(v.clone(), Pol::Pos);
            (1, pol, BTreeSet::new(), false)
        }
        Kind::Atom(a) => {
            let fv: BTreeSet<Variable> = a.expr.vars().cloned().collect();
            (1 + a.expr.num_vars() as u64, BTreeMap::new(), fv, false)
        }
        Kind::Not(f) => {
            let literal = matches!(
                f.kind(),
                Kind::Atom(_) | Kind::True | Kind::False
            );
            let size = if literal { f.size() } else { f.size() + 1 };
            let pol = f
                .0
                .bool_pol
                .iter()
                .map(|(v, p)| (v.clone(), p.flip()))
                .collect();
            (size, pol, (*f.0.data_fv).clone(), f.0.has_quant)
        }
        Kind::And(fs) | Kind::Or(fs) => {
            let mut size = fs.len().saturating_sub(1) as u64;
            let mut pol: BTreeMap<Variable, Pol> = BTreeMap::new();
            let mut fv = BTreeSet::new();
            let mut quant = false;
            for f in fs.iter() {
                size += f.size();
                for (v, p) in f.0.bool_pol.iter() {
                    pol.entry(v.clone())
                        .and_modify(|q| *q = q.join(*p))
                        .or_insert(*p);
                }
                fv.extend(f.0.data_fv.iter().cloned());
                quant |= f.0.has_quant;
            }
            (size, pol, fv, quant)
        }
        Kind::Exists(vs, f) => {
            let mut pol = (*f.0.bool_pol).clone();
            let mut fv = (*f.0.data_fv).clone();
            for v in vs.iter() {
                pol.remove(v);
                fv.remove(v);
            }
            (f.size() + 1 + vs.len() as u64, pol, fv, true)
        }
    }
}

impl Formula {
    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    /// Unique id of the interned node, stable within the process.
    pub fn id(&self) -> u64 {
        self.0.id
    }

    /// Structural hash, usable as a stable digest within one build.
    pub fn digest(&self) -> u64 {
        self.0.hash
    }

    /// Number of symbols: atoms, states and constants count themselves,
    /// an `n`-ary connective counts `n - 1`, and a negation is free on
    /// atoms (literals) and counts one elsewhere.
    pub fn size(&self) -> u64 {
        self.0.size
    }

    pub fn tt() -> Formula {
        intern(Kind::True)
    }

    pub fn ff() -> Formula {
        intern(Kind::False)
    }

    pub fn bool_const(b: bool) -> Formula {
        if b {
            Self::tt()
        } else {
            Self::ff()
        }
    }

    pub fn state(v: Variable) -> Result<Formula, LogicError> {
        if v.sort() != Sort::Bool {
            return Err(LogicError::SortMismatch {
                var: v.to_string(),
                expected: Sort::Bool,
            });
        }
        Ok(intern(Kind::State(v)))
    }

    /// Normalized atom `lhs rel rhs` over two terms. Ground atoms fold to
    /// constants; `>=`/`>` callers should negate the term themselves (the
    /// parser does).
    pub fn atom(lhs: Term, rel: Rel, rhs: Term) -> Formula {
        let diff = lhs - rhs;
        let konst = diff.constant_part().clone();
        let expr = diff - Term::constant(konst.clone());
        let bound = -konst;
        if expr.is_constant() {
            let truth = match rel {
                Rel::Le => BigRational::zero() <= bound,
                Rel::Lt => BigRational::zero() < bound,
                Rel::Eq => bound.is_zero(),
            };
            return Formula::bool_const(truth);
        }
        // scale so the leading coefficient is +1 (equalities) or +-1
        let lead = expr.coeffs().next().expect("nonconstant").1.clone();
        let scale = match rel {
            Rel::Eq => lead.recip(),
            Rel::Le | Rel::Lt => lead.abs().recip(),
        };
        let atom = Atom {
            expr: expr.scale(&scale),
            rel,
            rhs: bound * scale,
        };
        intern(Kind::Atom(atom))
    }

    /// `lhs <= rhs`
    pub fn le(lhs: Term, rhs: Term) -> Formula {
        Self::atom(lhs, Rel::Le, rhs)
    }

    /// `lhs < rhs`
    pub fn lt(lhs: Term, rhs: Term) -> Formula {
        Self::atom(lhs, Rel::Lt, rhs)
    }

    /// `lhs >= rhs`
    pub fn ge(lhs: Term, rhs: Term) -> Formula {
        Self::atom(rhs, Rel::Le, lhs)
    }

    /// `lhs > rhs`
    pub fn gt(lhs: Term, rhs: Term) -> Formula {
        Self::atom(rhs, Rel::Lt, lhs)
    }

    /// `lhs = rhs`
    pub fn eq(lhs: Term, rhs: Term) -> Formula {
        Self::atom(lhs, Rel::Eq, rhs)
    }

    /// Negation, folding `¬⊤`, `¬⊥` and double negation.
    pub fn not(f: &Formula) -> Formula {
        match f.kind() {
            Kind::True => Self::ff(),
            Kind::False => Self::tt(),
            Kind::Not(inner) => inner.clone(),
            _ => intern(Kind::Not(f.clone())),
        }
    }

    /// Conjunction. Flattens nested conjunctions but keeps boolean
    /// constants, so sizes add up exactly; use [`Formula::and_s`] where
    /// simplification is wanted.
    pub fn and(fs: Vec<Formula>) -> Formula {
        Self::nary(fs, true, false)
    }

    /// Disjunction, same conventions as [`Formula::and`].
    pub fn or(fs: Vec<Formula>) -> Formula {
        Self::nary(fs, false, false)
    }

    /// Simplifying conjunction: drops `⊤`, collapses on `⊥`, dedups.
    pub fn and_s(fs: Vec<Formula>) -> Formula {
        Self::nary(fs, true, true)
    }

    /// Simplifying disjunction: drops `⊥`, collapses on `⊤`, dedups.
    pub fn or_s(fs: Vec<Formula>) -> Formula {
        Self::nary(fs, false, true)
    }

    fn nary(fs: Vec<Formula>, conj: bool, simplify: bool) -> Formula {
        let mut out: Vec<Formula> = Vec::with_capacity(fs.len());
        let mut seen: BTreeSet<u64> = BTreeSet::new();
        let unit = if conj { Self::tt() } else { Self::ff() };
        let zero = if conj { Self::ff() } else { Self::tt() };
        let mut stack: Vec<Formula> = fs;
        stack.reverse();
        while let Some(f) = stack.pop() {
            let flatten = match f.kind() {
                Kind::And(children) if conj => Some(children.to_vec()),
                Kind::Or(children) if !conj => Some(children.to_vec()),
                _ => None,
            };
            if let Some(children) = flatten {
                for c in children.into_iter().rev() {
                    stack.push(c);
                }
                continue;
            }
            if simplify {
                if f == zero {
                    return zero;
                }
                if f == unit || !seen.insert(f.id()) {
                    continue;
                }
            }
            out.push(f);
        }
        match out.len() {
            0 => unit,
            1 => out.pop().unwrap(),
            _ => {
                if conj {
                    intern(Kind::And(out.into_boxed_slice()))
                } else {
                    intern(Kind::Or(out.into_boxed_slice()))
                }
            }
        }
    }

    /// `a → b`, as `¬a ∨ b`.
    pub fn implies(a: &Formula, b: &Formula) -> Formula {
        Self::or(vec![Self::not(a), b.clone()])
    }

    /// Existential quantification; vacuous binders are dropped and nested
    /// quantifiers merged.
    pub fn exists(vars: Vec<Variable>, body: Formula) -> Formula {
        let mut vs: Vec<Variable> = vars
            .into_iter()
            .filter(|v| body.is_free(v))
            .collect();
        vs.sort();
        vs.dedup();
        if vs.is_empty() {
            return body;
        }
        if let Kind::Exists(inner_vs, inner) = body.kind() {
            let mut all = inner_vs.to_vec();
            all.extend(vs);
            all.sort();
            all.dedup();
            return intern(Kind::Exists(all.into_boxed_slice(), inner.clone()));
        }
        intern(Kind::Exists(vs.into_boxed_slice(), body))
    }

    pub fn is_free(&self, v: &Variable) -> bool {
        match v.sort() {
            Sort::Bool => self.0.bool_pol.contains_key(v),
            Sort::Data => self.0.data_fv.contains(v),
        }
    }

    /// Free boolean variables with the polarity of their occurrences.
    pub fn bool_polarities(&self) -> &BTreeMap<Variable, Pol> {
        &self.0.bool_pol
    }

    /// Free boolean (state) variables.
    pub fn free_bools(&self) -> impl Iterator<Item = &Variable> {
        self.0.bool_pol.keys()
    }

    /// Free data variables.
    pub fn free_data(&self) -> &BTreeSet<Variable> {
        &self.0.data_fv
    }

    pub fn free_vars(&self) -> Vec<Variable> {
        let mut vs: Vec<Variable> = self.free_bools().cloned().collect();
        vs.extend(self.0.data_fv.iter().cloned());
        vs
    }

    /// Membership in `Form+`: every free boolean variable occurs under an
    /// even number of negations.
    pub fn is_positive(&self) -> bool {
        self.0
            .bool_pol
            .values()
            .all(|p| matches!(p, Pol::Pos))
    }

    /// Some free state with a negative occurrence, if any; used in
    /// diagnostics.
    pub fn negative_state(&self) -> Option<&Variable> {
        self.0
            .bool_pol
            .iter()
            .find(|(_, p)| !matches!(p, Pol::Pos))
            .map(|(v, _)| v)
    }

    pub fn is_quantifier_free(&self) -> bool {
        !self.0.has_quant
    }

    /// Path to a negative-polarity occurrence of a free state, as child
    /// indexes from the root; used by validation diagnostics.
    pub fn negative_occurrence_path(&self) -> Option<(Variable, Vec<usize>)> {
        fn walk(
            f: &Formula,
            neg: bool,
            bound: &mut Vec<Variable>,
            path: &mut Vec<usize>,
        ) -> Option<Variable> {
            match f.kind() {
                Kind::State(v) => {
                    if neg && !bound.contains(v) {
                        Some(v.clone())
                    } else {
                        None
                    }
                }
                Kind::True | Kind::False | Kind::Atom(_) => None,
                Kind::Not(inner) => {
                    path.push(0);
                    if let Some(v) = walk(inner, !neg, bound, path) {
                        return Some(v);
                    }
                    path.pop();
                    None
                }
                Kind::And(fs) | Kind::Or(fs) => {
                    for (i, c) in fs.iter().enumerate() {
                        path.push(i);
                        if let Some(v) = walk(c, neg, bound, path) {
                            return Some(v);
                        }
                        path.pop();
                    }
                    None
                }
                Kind::Exists(vs, inner) => {
                    let mark = bound.len();
                    bound.extend(vs.iter().cloned());
                    path.push(0);
                    if let Some(v) = walk(inner, neg, bound, path) {
                        return Some(v);
                    }
                    path.pop();
                    bound.truncate(mark);
                    None
                }
            }
        }
        let mut path = Vec::new();
        walk(self, false, &mut Vec::new(), &mut path).map(|v| (v, path))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            Kind::True => write!(f, "true"),
            Kind::False => write!(f, "false"),
            Kind::State(v) => write!(f, "{}", v),
            Kind::Atom(a) => write!(f, "{}", a),
            Kind::Not(inner) => write!(f, "(not {})", inner),
            Kind::And(fs) => {
                write!(f, "(and")?;
                for c in fs.iter() {
                    write!(f, " {}", c)?;
                }
                write!(f, ")")
            }
            Kind::Or(fs) => {
                write!(f, "(or")?;
                for c in fs.iter() {
                    write!(f, " {}", c)?;
                }
                write!(f, ")")
            }
            Kind::Exists(vs, inner) => {
                write!(f, "(exists (")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{}", v)?;
                }
                write!(f, ") {})", inner)
            }
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
