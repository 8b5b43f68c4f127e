//! Emptiness by in-place label strengthening: every dequeued uncovered
//! node is checked for feasibility; spurious paths strengthen the labels
//! along them with interpolants, covering is re-attempted after each
//! strengthening, and only uncovered nodes expand. Refinement never
//! rebuilds the tree.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::automaton::Automaton;
use crate::logic::{Formula, Variable};
use crate::report::{
    BudgetGuard, BudgetKind, Phase, RunReport, RunStats, SearchConfig, SearchError, TraceRecord,
    Verdict,
};
use crate::smt::{positivize, SatResult, Solver, SolverError};
use crate::symbolic::{
    build_theta, feasibility, post, witness_from_model, PostRepair,
};

pub(crate) struct INode {
    pub id: usize,
    pub parent: Option<(usize, String)>,
    pub path: Vec<String>,
    /// Label as a conjunction list: strengthening appends, syntactic
    /// duplicates short-circuit before any solver call.
    pub conjuncts: Vec<Formula>,
    pub children: Vec<(String, usize)>,
    pub covered_by: Option<usize>,
    /// Replacement set `R(n)`: unstamped states whose rules fire next.
    pub repl: BTreeSet<Variable>,
    /// Stamped transition formula labelling the incoming edge.
    pub edge_theta: Option<Formula>,
    pub in_n: bool,
    pub expanded: bool,
    pub queued: bool,
}

impl INode {
    pub fn label(&self) -> Formula {
        Formula::and_s(self.conjuncts.clone())
    }
}

pub(crate) struct ImpactArt {
    pub nodes: Vec<INode>,
    pub worklist: VecDeque<usize>,
    event_rank: BTreeMap<String, usize>,
}

impl ImpactArt {
    pub fn new(a: &Automaton) -> Self {
        let root = INode {
            id: 0,
            parent: None,
            path: Vec::new(),
            conjuncts: vec![a.init().clone()],
            children: Vec::new(),
            covered_by: None,
            repl: a.init().free_bools().cloned().collect(),
            edge_theta: None,
            in_n: false,
            expanded: false,
            queued: true,
        };
        ImpactArt {
            nodes: vec![root],
            worklist: VecDeque::from([0]),
            event_rank: a
                .events()
                .iter()
                .enumerate()
                .map(|(i, e)| (e.clone(), i))
                .collect(),
        }
    }

    /// Length-lexicographic order on path labels, alphabet in declaration
    /// order.
    pub fn path_precedes(&self, x: &[String], y: &[String]) -> bool {
        if x.len() != y.len() {
            return x.len() < y.len();
        }
        for (a, b) in x.iter().zip(y.iter()) {
            let (ra, rb) = (self.event_rank[a], self.event_rank[b]);
            if ra != rb {
                return ra < rb;
            }
        }
        false
    }

    pub fn is_covered(&self, mut n: usize) -> bool {
        loop {
            if self.nodes[n].covered_by.is_some() {
                return true;
            }
            match &self.nodes[n].parent {
                Some((p, _)) => n = *p,
                None => return false,
            }
        }
    }

    pub fn is_ancestor_or_self(&self, anc: usize, mut n: usize) -> bool {
        loop {
            if n == anc {
                return true;
            }
            match &self.nodes[n].parent {
                Some((p, _)) => n = *p,
                None => return false,
            }
        }
    }

    pub fn path_nodes(&self, mut n: usize) -> Vec<usize> {
        let mut ids = vec![n];
        while let Some((p, _)) = &self.nodes[n].parent {
            ids.push(*p);
            n = *p;
        }
        ids.reverse();
        ids
    }
}

struct Search<'a> {
    a: &'a Automaton,
    cfg: &'a SearchConfig,
    solver: Solver,
    guard: BudgetGuard,
    art: ImpactArt,
    acceptance: Formula,
    stats: RunStats,
    trace: Vec<TraceRecord>,
    interpolants: Vec<Vec<String>>,
}

pub fn check_emptiness_impact(
    a: &Automaton,
    cfg: &SearchConfig,
) -> Result<RunReport, SearchError> {
    let guard = BudgetGuard::new(cfg.budget.clone());
    let solver = Solver::new(cfg.solver_config(guard.deadline));
    let mut search = Search {
        a,
        cfg,
        solver,
        guard,
        art: ImpactArt::new(a),
        acceptance: crate::symbolic::acceptance_conjunct(a),
        stats: RunStats {
            nodes_created: 1,
            ..RunStats::default()
        },
        trace: Vec::new(),
        interpolants: Vec::new(),
    };
    let verdict = match search.run() {
        Ok(v) => v,
        Err(SearchError::Solver(SolverError::Budget { .. })) => {
            Verdict::BudgetExceeded(BudgetKind::Time)
        }
        Err(e) => return Err(e),
    };
    search.stats.solver_calls =
        search.solver.stats.sat_checks + search.solver.stats.entailment_checks;
    search.stats.interpolants_verified = search.solver.stats.interpolants_verified;
    search.stats.wall_millis = search.guard.elapsed_millis();
    Ok(RunReport {
        verdict,
        stats: search.stats,
        trace: search.trace,
        interpolants: search.interpolants,
    })
}

impl Search<'_> {
    fn record(&mut self, phase: Phase, node: usize) {
        if !self.cfg.collect_trace {
            return;
        }
        let path = self.art.nodes[node].path.join(".");
        let digest = format!("{:016x}", self.art.nodes[node].label().digest());
        self.trace.push(TraceRecord {
            phase,
            node,
            path,
            digest,
        });
    }

    fn run(&mut self) -> Result<Verdict, SearchError> {
        loop {
            if self.cfg.invariant_checks {
                self.check_invariants()?;
            }
            let Some(n) = self.art.worklist.pop_front() else {
                if self.cfg.invariant_checks {
                    self.check_terminal()?;
                }
                return Ok(Verdict::Empty);
            };
            self.art.nodes[n].queued = false;
            if let Some(kind) = self.guard.check(self.stats.nodes_created, &self.solver) {
                return Ok(Verdict::BudgetExceeded(kind));
            }
            // coverage may have arrived after enqueueing
            if self.art.is_covered(n) {
                self.record(Phase::Drop, n);
                continue;
            }
            self.art.nodes[n].in_n = true;

            let events = self.art.nodes[n].path.clone();
            match feasibility(self.a, &events, &mut self.solver)? {
                SatResult::Sat(model) => {
                    let w = witness_from_model(self.a, &events, &model);
                    if !crate::automaton::membership(self.a, &w, &mut self.solver)? {
                        return Err(SearchError::Invariant(
                            "witness rejected by membership".into(),
                        ));
                    }
                    self.record(Phase::Witness, n);
                    return Ok(Verdict::Nonempty(w));
                }
                SatResult::Unsat => {
                    self.refine_path(n, &events)?;
                }
            }

            if !self.art.is_covered(n) {
                self.expand(n)?;
            }
        }
    }

    /// Strengthen the labels along the spurious path with the positivized
    /// interpolation sequence, uncovering and re-closing as needed.
    fn refine_path(&mut self, n: usize, events: &[String]) -> Result<(), SearchError> {
        self.stats.refinements += 1;
        let problem = build_theta(self.a, events)?;
        let seq = self.solver.interpolate_sequence(&problem.conjuncts)?;
        let repair = PostRepair::new(self.a, self.a.init().clone(), events);
        let seq = positivize(&seq, &repair)?;
        if self.cfg.verify_interpolants {
            self.solver.verify_sequence(&problem.conjuncts, &seq)?;
        }
        if self.cfg.dump_interpolants {
            self.interpolants
                .push(seq.items().iter().map(|f| f.to_string()).collect());
        }
        self.record(Phase::Refine, n);

        let path_nodes = self.art.path_nodes(n);
        debug_assert_eq!(path_nodes.len(), seq.len());
        if self.cfg.invariant_checks {
            // stored edge formulas and replacement sets must agree with a
            // fresh unfolding of the same path
            for (i, &ni) in path_nodes.iter().enumerate().skip(1) {
                if self.art.nodes[ni].edge_theta.as_ref() != Some(&problem.conjuncts[i]) {
                    return Err(SearchError::Invariant(format!(
                        "edge formula at {} diverges from the unfolding",
                        ni
                    )));
                }
                let stored: BTreeSet<Variable> = self.art.nodes[ni]
                    .repl
                    .iter()
                    .map(|q| q.at(i as u32))
                    .collect();
                if stored != problem.repl_sets[i] {
                    return Err(SearchError::Invariant(format!(
                        "replacement set at {} diverges from the unfolding",
                        ni
                    )));
                }
            }
        }
        let mut closed = false;
        for (i, item) in seq.items().iter().enumerate() {
            let ni = path_nodes[i];
            if self.art.nodes[ni].conjuncts.iter().any(|c| c == item) {
                continue; // syntactic duplicate
            }
            if self.solver.entails(&self.art.nodes[ni].label(), item)? {
                continue; // already entailed: no-op, no uncovering
            }
            // uncover nodes covered by n_i before strengthening its label
            let dependents: Vec<usize> = (0..self.art.nodes.len())
                .filter(|&m| self.art.nodes[m].covered_by == Some(ni))
                .collect();
            for m in dependents {
                self.art.nodes[m].covered_by = None;
                self.record(Phase::Uncover, m);
                self.reactivate(m);
            }
            self.art.nodes[ni].conjuncts.push(item.clone());
            self.record(Phase::Strengthen, ni);
            if !closed {
                closed = self.close(ni)?;
            }
        }

        if self.cfg.progress_check {
            let label = self.art.nodes[n].label();
            let q = Formula::and_s(vec![label, self.acceptance.clone()]);
            if self.solver.check_sat(&q)?.is_sat() {
                return Err(SearchError::Invariant(
                    "leaf label still reaches acceptance after refinement".into(),
                ));
            }
        }
        Ok(())
    }

    /// Try to cover `x` by a processed node earlier in the path order;
    /// on success, nodes covered by `x` or its descendants are uncovered
    /// (covering is not transitive under in-place strengthening).
    fn close(&mut self, x: usize) -> Result<bool, SearchError> {
        let mut candidates: Vec<usize> = (0..self.art.nodes.len())
            .filter(|&y| {
                y != x
                    && self.art.nodes[y].in_n
                    && self
                        .art
                        .path_precedes(&self.art.nodes[y].path, &self.art.nodes[x].path)
            })
            .collect();
        candidates.sort_by(|&p, &q| {
            if self
                .art
                .path_precedes(&self.art.nodes[p].path, &self.art.nodes[q].path)
            {
                std::cmp::Ordering::Less
            } else if self
                .art
                .path_precedes(&self.art.nodes[q].path, &self.art.nodes[p].path)
            {
                std::cmp::Ordering::Greater
            } else {
                p.cmp(&q)
            }
        });
        let xl = self.art.nodes[x].label();
        for y in candidates {
            let yl = self.art.nodes[y].label();
            if self.solver.entails(&xl, &yl)? {
                // uncover everything covered from inside x's subtree
                let stale: Vec<usize> = (0..self.art.nodes.len())
                    .filter(|&m| {
                        self.art.nodes[m]
                            .covered_by
                            .map(|t| self.art.is_ancestor_or_self(x, t))
                            .unwrap_or(false)
                    })
                    .collect();
                for m in stale {
                    self.art.nodes[m].covered_by = None;
                    self.record(Phase::Uncover, m);
                    self.reactivate(m);
                }
                self.art.nodes[x].covered_by = Some(y);
                self.stats.covers += 1;
                self.record(Phase::Close, x);
                self.drop_covered_from_worklist(x);
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// A node that lost its cover returns to the frontier: enqueue every
    /// unexpanded, unqueued, now-uncovered node in its subtree, stopping at
    /// branches that remain covered on their own.
    fn reactivate(&mut self, m: usize) {
        let mut stack = vec![m];
        let mut found = Vec::new();
        while let Some(d) = stack.pop() {
            if self.art.nodes[d].covered_by.is_some() {
                continue; // still covered below this point
            }
            if !self.art.nodes[d].expanded {
                if !self.art.nodes[d].queued {
                    found.push(d);
                }
                continue;
            }
            stack.extend(self.art.nodes[d].children.iter().map(|(_, c)| *c));
        }
        found.sort_unstable();
        for d in found {
            self.art.nodes[d].queued = true;
            self.art.nodes[d].in_n = false;
            self.art.worklist.push_back(d);
        }
    }

    /// Keep the worklist free of covered nodes (they would be dropped at
    /// dequeue anyway; removing them eagerly maintains the invariant that
    /// no node is simultaneously covered and queued).
    fn drop_covered_from_worklist(&mut self, covered_root: usize) {
        let ids: Vec<usize> = self.art.worklist.iter().copied().collect();
        let mut dropped = Vec::new();
        for id in ids {
            if self.art.nodes[id].queued && self.art.is_ancestor_or_self(covered_root, id) {
                self.art.nodes[id].queued = false;
                dropped.push(id);
            }
        }
        for id in dropped {
            self.record(Phase::Drop, id);
        }
        let keep: Vec<usize> = self
            .art
            .worklist
            .iter()
            .copied()
            .filter(|&id| self.art.nodes[id].queued)
            .collect();
        self.art.worklist = keep.into();
    }

    fn expand(&mut self, n: usize) -> Result<(), SearchError> {
        self.stats.expansions += 1;
        self.art.nodes[n].expanded = true;
        let depth = self.art.nodes[n].path.len() as u32;
        for event in self.a.events().to_vec() {
            let rules = self
                .a
                .rules_for(&event)
                .expect("event from the alphabet");
            // stamped transition formula for this step and the replacement
            // set recurrence
            let mut parts = Vec::new();
            let mut next_repl: BTreeSet<Variable> = BTreeSet::new();
            for q in self.art.nodes[n].repl.clone() {
                let body = rules.get(&q).cloned().unwrap_or_else(Formula::ff);
                next_repl.extend(body.free_bools().cloned());
                let stamped = crate::logic::stamp_states(
                    &crate::logic::stamp_rule_data(&body, depth),
                    depth + 1,
                );
                let head = Formula::state(q.at(depth)).expect("state var");
                parts.push(Formula::implies(&head, &stamped));
            }
            let theta = Formula::and_s(parts);

            let id = self.art.nodes.len();
            let mut path = self.art.nodes[n].path.clone();
            path.push(event.clone());
            self.art.nodes.push(INode {
                id,
                parent: Some((n, event.clone())),
                path,
                conjuncts: Vec::new(), // empty conjunction: ⊤
                children: Vec::new(),
                covered_by: None,
                repl: next_repl,
                edge_theta: Some(theta),
                in_n: false,
                expanded: false,
                queued: true,
            });
            self.art.nodes[n].children.push((event.clone(), id));
            self.art.worklist.push_back(id);
            self.stats.nodes_created += 1;
            self.record(Phase::Expand, id);
        }
        Ok(())
    }

    fn check_invariants(&mut self) -> Result<(), SearchError> {
        // well-labeledness along every edge
        for i in 0..self.art.nodes.len() {
            for (event, child) in self.art.nodes[i].children.clone() {
                let lhs = post(self.a, &self.art.nodes[i].label(), &event)?;
                let rhs = self.art.nodes[child].label();
                if !self.solver.entails(&lhs, &rhs)? {
                    return Err(SearchError::Invariant(format!(
                        "edge ({}, {}, {}) is not well labeled",
                        i, event, child
                    )));
                }
            }
        }
        for node in &self.art.nodes {
            // covering targets precede sources
            if let Some(t) = node.covered_by {
                if !self
                    .art
                    .path_precedes(&self.art.nodes[t].path, &node.path)
                {
                    return Err(SearchError::Invariant(format!(
                        "covering edge ({}, {}) violates the path order",
                        node.id, t
                    )));
                }
            }
            // no node both covered and queued
            if node.queued && self.art.is_covered(node.id) {
                return Err(SearchError::Invariant(format!(
                    "node {} is covered and queued",
                    node.id
                )));
            }
        }
        Ok(())
    }

    fn check_terminal(&mut self) -> Result<(), SearchError> {
        for i in 0..self.art.nodes.len() {
            let node = &self.art.nodes[i];
            let leaf_ok = node.expanded || self.art.is_covered(i);
            if !leaf_ok {
                return Err(SearchError::Invariant(format!(
                    "leaf {} neither covered nor expanded at termination",
                    i
                )));
            }
            if let Some(t) = node.covered_by {
                let (nl, tl) = (node.label(), self.art.nodes[t].label());
                if !self.solver.entails(&nl, &tl)? {
                    return Err(SearchError::Invariant(format!(
                        "covering edge ({}, {}) no longer entailed at termination",
                        i, t
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfix::*;

    fn strict_cfg() -> SearchConfig {
        SearchConfig {
            verify_interpolants: true,
            progress_check: true,
            invariant_checks: true,
            collect_trace: true,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn proves_the_example_empty() {
        let a = lockstep_counters();
        let report = check_emptiness_impact(&a, &strict_cfg()).unwrap();
        assert!(matches!(report.verdict, Verdict::Empty), "{:?}", report.verdict);
        assert!(report.stats.nodes_created < 200);
        assert!(report.stats.covers >= 1);
    }

    #[test]
    fn finds_witness_on_relaxed_variant() {
        let a = lockstep_counters_relaxed();
        let report = check_emptiness_impact(&a, &strict_cfg()).unwrap();
        match report.verdict {
            Verdict::Nonempty(w) => assert!(w.len() <= 2),
            other => panic!("expected a witness, got {:?}", other),
        }
    }

    #[test]
    fn bottom_initial_configuration_is_empty() {
        let a = crate::automaton::Automaton::new(
            vec![xv()],
            vec![crate::logic::Variable::state("q")],
            vec!["a".into()],
            crate::logic::Formula::ff(),
            Default::default(),
            Default::default(),
        );
        let report = check_emptiness_impact(&a, &strict_cfg()).unwrap();
        assert!(matches!(report.verdict, Verdict::Empty));
    }
}
