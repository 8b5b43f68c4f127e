//! CDCL core with an attached simplex theory and partial-interpolant
//! threading.
//!
//! Atoms are either boolean state variables or normalized linear
//! inequalities; the latter are bound to simplex variables. Decisions follow
//! a fixed order (lexicographic by canonical atom form) with negative
//! polarity first, so runs are reproducible. When built with cut positions,
//! every clause carries one partial interpolant per cut and the final
//! refutation yields the interpolation sequence.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use num::{BigRational, Signed};

use crate::logic::{Formula, Kind, Rel, Term, Valuation, Variable};

use super::interpolate::{combine_on_pivot, farkas_sum, IneqView, ItpVec, PartSpan};
use super::preprocess::NForm;
use super::simplex::{BoundKind, QDelta, SVar, Simplex, TheoryConflict};
use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lit(u32);

impl Lit {
    fn new(atom: u32, pos: bool) -> Lit {
        Lit(atom << 1 | (!pos) as u32)
    }

    fn atom(self) -> u32 {
        self.0 >> 1
    }

    fn is_pos(self) -> bool {
        self.0 & 1 == 0
    }

    fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

enum Payload {
    /// An interned state variable or inequality atom.
    Real(Formula),
    /// A definition variable introduced by clausification.
    Def,
}

struct AtomInfo {
    payload: Payload,
    span: PartSpan,
    /// Simplex binding for inequality atoms: variable, bound asserted by
    /// the positive literal, bound asserted by the negative literal.
    theory: Option<TheoryBind>,
}

struct TheoryBind {
    svar: SVar,
    pos: (BoundKind, QDelta),
    neg: (BoundKind, QDelta),
}

struct Clause {
    lits: Vec<Lit>,
    /// Source partition for input clauses; `None` for lemmas and learned
    /// clauses.
    partition: Option<u32>,
    itp: Option<ItpVec>,
}

#[derive(Debug, Clone)]
pub enum SatOutcome {
    Sat(Valuation),
    Unsat(Option<ItpVec>),
    Unknown { conflicts: u64 },
}

pub struct SatOptions {
    pub max_conflicts: u64,
    pub deadline: Option<Instant>,
}

pub struct SatCore {
    atoms: Vec<AtomInfo>,
    atom_ids: HashMap<u64, u32>,
    clauses: Vec<Clause>,
    watches: Vec<Vec<usize>>,
    cuts: usize,

    assign: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    theory_head: usize,

    simplex: Simplex,
    data_vars: BTreeMap<Variable, SVar>,
    slacks: HashMap<Term, SVar>,

    decision_order: Vec<u32>,
    conflicts: u64,
    /// Partition of an empty clause produced during construction, if any.
    empty_input: Option<u32>,
}

impl SatCore {
    pub fn new(n_parts: u32) -> Self {
        let cuts = if n_parts >= 2 {
            (n_parts - 1) as usize
        } else {
            0
        };
        SatCore {
            atoms: Vec::new(),
            atom_ids: HashMap::new(),
            clauses: Vec::new(),
            watches: Vec::new(),
            cuts,
            assign: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            theory_head: 0,
            simplex: Simplex::new(),
            data_vars: BTreeMap::new(),
            slacks: HashMap::new(),
            decision_order: Vec::new(),
            conflicts: 0,
            empty_input: None,
        }
    }

    fn interpolating(&self) -> bool {
        self.cuts > 0
    }

    fn real_atom(&mut self, f: &Formula, partition: u32) -> u32 {
        if let Some(&id) = self.atom_ids.get(&f.id()) {
            self.atoms[id as usize].span.record(partition);
            return id;
        }
        let id = self.atoms.len() as u32;
        let mut span = PartSpan::empty();
        span.record(partition);
        self.atoms.push(AtomInfo {
            payload: Payload::Real(f.clone()),
            span,
            theory: None,
        });
        self.atom_ids.insert(f.id(), id);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        id
    }

    fn def_atom(&mut self, partition: u32) -> u32 {
        let id = self.atoms.len() as u32;
        let mut span = PartSpan::empty();
        span.record(partition);
        self.atoms.push(AtomInfo {
            payload: Payload::Def,
            span,
            theory: None,
        });
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        id
    }

    /// Clausify one conjunct into the given partition.
    pub fn add_conjunct(&mut self, nf: &NForm, partition: u32) {
        match nf {
            NForm::True => {}
            NForm::False => self.add_input_clause(Vec::new(), partition),
            NForm::And(cs) => {
                for c in cs {
                    self.add_conjunct(c, partition);
                }
            }
            NForm::Lit { .. } | NForm::Or(_) => {
                let mut lits = Vec::new();
                if self.or_literals(nf, partition, &mut lits) {
                    return; // contains ⊤
                }
                self.add_input_clause(lits, partition);
            }
        }
    }

    /// Collect the literals of a disjunctive context; returns true when the
    /// context is trivially satisfied.
    fn or_literals(&mut self, nf: &NForm, partition: u32, out: &mut Vec<Lit>) -> bool {
        match nf {
            NForm::True => true,
            NForm::False => false,
            NForm::Lit { atom, pos } => {
                let id = self.real_atom(atom, partition);
                out.push(Lit::new(id, *pos));
                false
            }
            NForm::Or(cs) => {
                for c in cs {
                    if self.or_literals(c, partition, out) {
                        return true;
                    }
                }
                false
            }
            NForm::And(cs) => {
                // define t → AND(cs)
                let t = self.def_atom(partition);
                for c in cs {
                    let mut body = Vec::new();
                    body.push(Lit::new(t, false));
                    if self.or_literals(c, partition, &mut body) {
                        continue;
                    }
                    self.add_input_clause(body, partition);
                }
                out.push(Lit::new(t, true));
                false
            }
        }
    }

    fn input_itp(&self, lits: &[Lit], partition: u32) -> Option<ItpVec> {
        if !self.interpolating() {
            return None;
        }
        let vec: ItpVec = (0..self.cuts)
            .map(|i| {
                let cut = i as u32;
                if partition <= cut {
                    // prefix clause: project the literals shared with the suffix
                    let shared: Vec<Formula> = lits
                        .iter()
                        .filter(|l| !self.atoms[l.atom() as usize].span.prefix_local(cut))
                        .map(|l| self.lit_formula(*l))
                        .collect();
                    Formula::or_s(shared)
                } else {
                    Formula::tt()
                }
            })
            .collect();
        Some(vec)
    }

    fn lit_formula(&self, l: Lit) -> Formula {
        match &self.atoms[l.atom() as usize].payload {
            Payload::Real(f) => {
                if l.is_pos() {
                    f.clone()
                } else {
                    Formula::not(f)
                }
            }
            Payload::Def => unreachable!("definition atoms are partition-local"),
        }
    }

    fn add_input_clause(&mut self, mut lits: Vec<Lit>, partition: u32) {
        // drop duplicate literals and tautological clauses
        lits.sort_by_key(|l| l.0);
        lits.dedup();
        if lits.windows(2).any(|w| w[0].atom() == w[1].atom()) {
            return;
        }
        if lits.is_empty() {
            if self.empty_input.is_none() {
                self.empty_input = Some(partition);
            }
            return;
        }
        self.clauses.push(Clause {
            lits,
            partition: Some(partition),
            itp: None,
        });
        let cid = self.clauses.len() - 1;
        self.watch(cid);
    }

    /// Fill in input-clause interpolants; spans are final once every
    /// conjunct has been clausified.
    fn finalize_input_itps(&mut self) {
        if !self.interpolating() {
            return;
        }
        for cid in 0..self.clauses.len() {
            if let Some(p) = self.clauses[cid].partition {
                let lits = self.clauses[cid].lits.clone();
                self.clauses[cid].itp = self.input_itp(&lits, p);
            }
        }
    }

    fn watch(&mut self, cid: usize) {
        let lits = &self.clauses[cid].lits;
        if lits.len() == 1 {
            return; // units handled at solve start
        }
        let (a, b) = (lits[0], lits[1]);
        self.watches[a.negate().index()].push(cid);
        self.watches[b.negate().index()].push(cid);
    }

    /// Create simplex bindings for every inequality atom. Called once after
    /// all conjuncts are added.
    fn bind_theory(&mut self) {
        let mut vars: BTreeSet<Variable> = BTreeSet::new();
        for info in &self.atoms {
            if let Payload::Real(f) = &info.payload {
                if let Kind::Atom(a) = f.kind() {
                    vars.extend(a.expr().vars().cloned());
                }
            }
        }
        for v in vars {
            let s = self.simplex.add_var();
            self.data_vars.insert(v, s);
        }
        for idx in 0..self.atoms.len() {
            let formula = match &self.atoms[idx].payload {
                Payload::Real(f) => f.clone(),
                Payload::Def => continue,
            };
            let Kind::Atom(a) = formula.kind() else {
                continue;
            };
            let (expr, rel, rhs) = (a.expr(), a.rel(), a.rhs().clone());
            debug_assert!(rel != Rel::Eq, "equalities are split in preprocessing");
            let lead_neg = expr
                .coeffs()
                .next()
                .map(|(_, c)| c.is_negative())
                .unwrap_or(false);
            let (key, bound_rhs) = if lead_neg {
                (
                    expr.clone().scale(&-BigRational::from_integer(1.into())),
                    -rhs,
                )
            } else {
                (expr.clone(), rhs)
            };
            let svar = if key.num_vars() == 1 {
                let (v, c) = key.coeffs().next().unwrap();
                debug_assert!(c == &BigRational::from_integer(1.into()));
                self.data_vars[v]
            } else {
                match self.slacks.get(&key) {
                    Some(&s) => s,
                    None => {
                        let def: Vec<(SVar, BigRational)> = key
                            .coeffs()
                            .map(|(v, c)| (self.data_vars[v], c.clone()))
                            .collect();
                        let s = self.simplex.add_slack(def);
                        self.slacks.insert(key.clone(), s);
                        s
                    }
                }
            };
            // atom: expr rel rhs; with lead_neg it reads sign·key rel rhs
            let (pos, neg) = match (rel, lead_neg) {
                (Rel::Le, false) => (
                    (BoundKind::Upper, QDelta::real(bound_rhs.clone())),
                    (BoundKind::Lower, QDelta::with_delta(bound_rhs.clone(), 1)),
                ),
                (Rel::Lt, false) => (
                    (BoundKind::Upper, QDelta::with_delta(bound_rhs.clone(), -1)),
                    (BoundKind::Lower, QDelta::real(bound_rhs.clone())),
                ),
                // -key ≤ rhs  ⇔  key ≥ -rhs (bound_rhs = -rhs already)
                (Rel::Le, true) => (
                    (BoundKind::Lower, QDelta::real(bound_rhs.clone())),
                    (BoundKind::Upper, QDelta::with_delta(bound_rhs.clone(), -1)),
                ),
                // -key < rhs  ⇔  key > -rhs
                (Rel::Lt, true) => (
                    (BoundKind::Lower, QDelta::with_delta(bound_rhs.clone(), 1)),
                    (BoundKind::Upper, QDelta::real(bound_rhs.clone())),
                ),
                (Rel::Eq, _) => unreachable!(),
            };
            self.atoms[idx].theory = Some(TheoryBind { svar, pos, neg });
        }
    }

    fn build_decision_order(&mut self) {
        let mut order: Vec<u32> = (0..self.atoms.len() as u32).collect();
        let key = |info: &AtomInfo| -> (u8, String) {
            match &info.payload {
                Payload::Real(f) => match f.kind() {
                    Kind::State(v) => (0, format!("{}", v)),
                    _ => (1, format!("{}", f)),
                },
                Payload::Def => (2, String::new()),
            }
        };
        order.sort_by(|&a, &b| {
            let (ka, kb) = (key(&self.atoms[a as usize]), key(&self.atoms[b as usize]));
            ka.cmp(&kb).then(a.cmp(&b))
        });
        self.decision_order = order;
    }

    fn value(&self, l: Lit) -> Option<bool> {
        self.assign[l.atom() as usize].map(|b| b == l.is_pos())
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) -> bool {
        match self.value(l) {
            Some(true) => true,
            Some(false) => false,
            None => {
                let a = l.atom() as usize;
                self.assign[a] = Some(l.is_pos());
                self.level[a] = self.trail_lim.len() as u32;
                self.reason[a] = reason;
                self.trail.push(l);
                true
            }
        }
    }

    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let watch_idx = p.index();
            let mut i = 0;
            'clauses: while i < self.watches[watch_idx].len() {
                let cid = self.watches[watch_idx][i];
                let false_lit = p.negate();
                // normalize: watched lits are lits[0], lits[1]
                {
                    let c = &mut self.clauses[cid];
                    if c.lits[0] == false_lit {
                        c.lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cid].lits[0];
                if self.value(first) == Some(true) {
                    i += 1;
                    continue;
                }
                // look for a replacement watch
                let len = self.clauses[cid].lits.len();
                for k in 2..len {
                    let cand = self.clauses[cid].lits[k];
                    if self.value(cand) != Some(false) {
                        self.clauses[cid].lits.swap(1, k);
                        self.watches[watch_idx].swap_remove(i);
                        self.watches[cand.negate().index()].push(cid);
                        continue 'clauses;
                    }
                }
                // unit or conflicting
                if !self.enqueue(first, Some(cid)) {
                    return Some(cid);
                }
                i += 1;
            }
        }
        None
    }

    /// Push pending theory literals into the simplex and check feasibility;
    /// returns a freshly added lemma clause id on conflict.
    fn theory_sync(&mut self) -> Option<usize> {
        let mut new_bounds = false;
        while self.theory_head < self.trail.len() {
            let l = self.trail[self.theory_head];
            self.theory_head += 1;
            let a = l.atom() as usize;
            let Some(bind) = &self.atoms[a].theory else {
                continue;
            };
            let (kind, value) = if l.is_pos() {
                bind.pos.clone()
            } else {
                bind.neg.clone()
            };
            let svar = bind.svar;
            new_bounds = true;
            if let Err(confl) = self.simplex.assert_bound(svar, kind, value, l.0) {
                return Some(self.add_lemma(confl));
            }
        }
        if new_bounds {
            if let Err(confl) = self.simplex.check() {
                return Some(self.add_lemma(confl));
            }
        }
        None
    }

    /// Turn a theory conflict into a lemma clause (the negation of the
    /// asserted bounds), with Farkas interpolants per cut.
    fn add_lemma(&mut self, confl: TheoryConflict) -> usize {
        let asserted: Vec<(Lit, BigRational)> = confl
            .parts
            .iter()
            .map(|(tag, coeff)| (Lit(*tag), coeff.clone()))
            .collect();
        debug_assert!(self.lemma_is_contradiction(&asserted));
        let itp = if self.interpolating() {
            let views: Vec<(IneqView, &BigRational, PartSpan)> = asserted
                .iter()
                .map(|(l, c)| {
                    let info = &self.atoms[l.atom() as usize];
                    let Payload::Real(f) = &info.payload else {
                        unreachable!("theory atoms are real");
                    };
                    (
                        IneqView::of(f, l.is_pos()).expect("inequality atom"),
                        c,
                        info.span,
                    )
                })
                .collect();
            let vec: ItpVec = (0..self.cuts)
                .map(|i| {
                    farkas_sum(
                        views
                            .iter()
                            .filter(|(_, _, span)| span.prefix_local(i as u32))
                            .map(|(v, c, _)| (v, *c)),
                    )
                })
                .collect();
            Some(vec)
        } else {
            None
        };
        let mut lits: Vec<Lit> = asserted.iter().map(|(l, _)| l.negate()).collect();
        // watch the deepest literals so the watch invariant survives backjumps
        lits.sort_by_key(|l| std::cmp::Reverse(self.level[l.atom() as usize]));
        self.clauses.push(Clause {
            lits,
            partition: None,
            itp,
        });
        let cid = self.clauses.len() - 1;
        self.watch(cid);
        cid
    }

    fn lemma_is_contradiction(&self, asserted: &[(Lit, BigRational)]) -> bool {
        let mut expr = Term::zero();
        let mut rhs = BigRational::from_integer(0.into());
        let mut strict = false;
        for (l, c) in asserted {
            let Payload::Real(f) = &self.atoms[l.atom() as usize].payload else {
                return false;
            };
            let Some(view) = IneqView::of(f, l.is_pos()) else {
                return false;
            };
            if !c.is_positive() {
                return false;
            }
            expr = expr + view.expr.scale(c);
            rhs += &view.rhs * c;
            strict |= view.strict;
        }
        expr.is_constant()
            && expr.constant_part() == &BigRational::from_integer(0.into())
            && (rhs.is_negative() || (strict && rhs == BigRational::from_integer(0.into())))
    }

    fn decide(&mut self) -> bool {
        for &a in &self.decision_order {
            if self.assign[a as usize].is_none() {
                self.trail_lim.push(self.trail.len());
                self.simplex.push_mark();
                let ok = self.enqueue(Lit::new(a, false), None);
                debug_assert!(ok);
                return true;
            }
        }
        false
    }

    fn backjump(&mut self, level: u32) {
        let target = self.trail_lim[level as usize];
        while self.trail.len() > target {
            let l = self.trail.pop().unwrap();
            let a = l.atom() as usize;
            self.assign[a] = None;
            self.reason[a] = None;
        }
        self.trail_lim.truncate(level as usize);
        self.qhead = self.trail.len();
        self.theory_head = self.trail.len();
        self.simplex.pop_to_mark(level as usize);
    }

    fn clause_itp(&self, cid: usize) -> Option<ItpVec> {
        self.clauses[cid].itp.clone()
    }

    /// Standard first-UIP analysis; level-0 literals are kept in the
    /// learned clause so it stays a pure resolvent of its antecedents and
    /// the partial interpolants remain exact.
    fn analyze(&mut self, confl: usize) -> (Vec<Lit>, u32, Option<ItpVec>) {
        let current = self.trail_lim.len() as u32;
        let mut seen = vec![false; self.atoms.len()];
        let mut counter = 0u32;
        let mut learned: Vec<Lit> = Vec::new();
        let mut itp = self.clause_itp(confl);
        let mut cid = confl;
        let mut pivot: Option<Lit> = None;
        let mut idx = self.trail.len();

        loop {
            for &q in &self.clauses[cid].lits {
                if let Some(p) = pivot {
                    if q.atom() == p.atom() {
                        continue;
                    }
                }
                let v = q.atom() as usize;
                if seen[v] {
                    continue;
                }
                seen[v] = true;
                if self.level[v] == current {
                    counter += 1;
                } else {
                    learned.push(q);
                }
            }
            // next resolution candidate: deepest seen literal on the trail
            loop {
                idx -= 1;
                if seen[self.trail[idx].atom() as usize] {
                    break;
                }
            }
            let p = self.trail[idx];
            seen[p.atom() as usize] = false;
            counter -= 1;
            if counter == 0 {
                learned.insert(0, p.negate());
                break;
            }
            cid = self.reason[p.atom() as usize].expect("propagated literal");
            if self.interpolating() {
                let span = self.atoms[p.atom() as usize].span;
                let right = self.clause_itp(cid).expect("itp threaded");
                itp = Some(combine_on_pivot(
                    self.cuts,
                    span,
                    itp.as_ref().unwrap(),
                    &right,
                ));
            }
            pivot = Some(p);
        }

        // move the deepest non-UIP literal to the second watch position
        let mut bj = 0;
        if learned.len() > 1 {
            let mut max_i = 1;
            for i in 1..learned.len() {
                if self.level[learned[i].atom() as usize]
                    > self.level[learned[max_i].atom() as usize]
                {
                    max_i = i;
                }
            }
            learned.swap(1, max_i);
            bj = self.level[learned[1].atom() as usize];
        }
        (learned, bj, itp)
    }

    /// Conflict at decision level zero: resolve everything away and return
    /// the interpolants of the empty clause.
    fn analyze_final(&mut self, confl: usize) -> Option<ItpVec> {
        let mut itp = self.clause_itp(confl);
        let mut seen = vec![false; self.atoms.len()];
        for &l in &self.clauses[confl].lits {
            seen[l.atom() as usize] = true;
        }
        for i in (0..self.trail.len()).rev() {
            let p = self.trail[i];
            let v = p.atom() as usize;
            if !seen[v] {
                continue;
            }
            let Some(r) = self.reason[v] else {
                debug_assert!(false, "level-0 literal without reason");
                continue;
            };
            if self.interpolating() {
                let span = self.atoms[v].span;
                let right = self.clause_itp(r).expect("itp threaded");
                itp = Some(combine_on_pivot(
                    self.cuts,
                    span,
                    itp.as_ref().unwrap(),
                    &right,
                ));
            }
            for &q in &self.clauses[r].lits {
                if q.atom() as usize != v {
                    seen[q.atom() as usize] = true;
                }
            }
        }
        itp
    }

    pub fn solve(&mut self, opts: &SatOptions) -> Result<SatOutcome, SolverError> {
        if let Some(p) = self.empty_input {
            let itp = self.input_itp(&[], p);
            return Ok(SatOutcome::Unsat(itp));
        }
        self.finalize_input_itps();
        self.bind_theory();
        self.build_decision_order();
        self.assign = vec![None; self.atoms.len()];
        self.level = vec![0; self.atoms.len()];
        self.reason = vec![None; self.atoms.len()];

        // seed unit clauses
        for cid in 0..self.clauses.len() {
            if self.clauses[cid].lits.len() == 1 {
                let l = self.clauses[cid].lits[0];
                if !self.enqueue(l, Some(cid)) {
                    let itps = self.analyze_final(cid);
                    return Ok(SatOutcome::Unsat(itps));
                }
            }
        }

        loop {
            let confl = match self.propagate() {
                Some(c) => Some(c),
                None => self.theory_sync(),
            };
            match confl {
                Some(cid) => {
                    self.conflicts += 1;
                    if self.conflicts > opts.max_conflicts {
                        return Ok(SatOutcome::Unknown {
                            conflicts: self.conflicts,
                        });
                    }
                    if self.conflicts % 64 == 0 {
                        if let Some(d) = opts.deadline {
                            if Instant::now() >= d {
                                return Ok(SatOutcome::Unknown {
                                    conflicts: self.conflicts,
                                });
                            }
                        }
                    }
                    if self.trail_lim.is_empty() {
                        let itps = self.analyze_final(cid);
                        return Ok(SatOutcome::Unsat(itps));
                    }
                    let (learned, bj, itp) = self.analyze(cid);
                    self.backjump(bj);
                    let unit = learned[0];
                    self.clauses.push(Clause {
                        lits: learned,
                        partition: None,
                        itp,
                    });
                    let new_cid = self.clauses.len() - 1;
                    self.watch(new_cid);
                    if !self.enqueue(unit, Some(new_cid)) {
                        // asserting literal already false at backjump level
                        if self.trail_lim.is_empty() {
                            let itps = self.analyze_final(new_cid);
                            return Ok(SatOutcome::Unsat(itps));
                        }
                        return Err(SolverError::Internal(
                            "learned clause not asserting".into(),
                        ));
                    }
                }
                None => {
                    if !self.decide() {
                        return Ok(SatOutcome::Sat(self.extract_model()));
                    }
                }
            }
        }
    }

    fn extract_model(&self) -> Valuation {
        let mut nu = Valuation::new();
        let concrete = self.simplex.concretize();
        for (v, s) in &self.data_vars {
            nu.set_rat(v.clone(), concrete[s].clone());
        }
        for (idx, info) in self.atoms.iter().enumerate() {
            if let Payload::Real(f) = &info.payload {
                if let Kind::State(v) = f.kind() {
                    if let Some(b) = self.assign[idx] {
                        nu.set_bool(v.clone(), b);
                    }
                }
            }
        }
        nu
    }

    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }
}

