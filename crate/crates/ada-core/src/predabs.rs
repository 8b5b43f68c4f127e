//! Emptiness by lazy predicate abstraction: an abstract reachability tree
//! whose node labels are predicate abstractions of post-images, covering to
//! keep the frontier an antichain, and pivot-based subtree refinement from
//! spurious counterexamples.

use std::collections::VecDeque;

use crate::automaton::Automaton;
use crate::logic::Formula;
use crate::report::{
    BudgetGuard, BudgetKind, Phase, RunReport, RunStats, SearchConfig, SearchError, TraceRecord,
    Verdict,
};
use crate::smt::{positivize, SatResult, Solver, SolverError};
use crate::symbolic::{
    abstract_accept_is_sat, abstract_image, acceptance_conjunct, build_theta_seeded, feasibility,
    post, witness_from_model, PostRepair, PredicateSet,
};

pub(crate) struct Node {
    pub id: usize,
    pub parent: Option<(usize, String)>,
    pub label: Formula,
    pub children: Vec<(String, usize)>,
    /// Outgoing covering edges: targets whose labels subsume one of this
    /// node's successor images.
    pub cover_out: Vec<usize>,
    pub removed: bool,
    pub queued: bool,
    pub expanded: bool,
    pub in_n: bool,
}

pub(crate) struct Art {
    pub nodes: Vec<Node>,
    pub worklist: VecDeque<usize>,
}

impl Art {
    pub fn new(root_label: Formula) -> Self {
        let root = Node {
            id: 0,
            parent: None,
            label: root_label,
            children: Vec::new(),
            cover_out: Vec::new(),
            removed: false,
            queued: true,
            expanded: false,
            in_n: false,
        };
        Art {
            nodes: vec![root],
            worklist: VecDeque::from([0]),
        }
    }

    pub fn add_child(&mut self, parent: usize, event: &str, label: Formula) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            id,
            parent: Some((parent, event.to_string())),
            label,
            children: Vec::new(),
            cover_out: Vec::new(),
            removed: false,
            queued: false,
            expanded: false,
            in_n: false,
        });
        self.nodes[parent].children.push((event.to_string(), id));
        id
    }

    /// Events along the root path.
    pub fn path(&self, mut n: usize) -> Vec<String> {
        let mut events = Vec::new();
        while let Some((p, e)) = &self.nodes[n].parent {
            events.push(e.clone());
            n = *p;
        }
        events.reverse();
        events
    }

    /// Node ids along the root path, root first, `n` last.
    pub fn path_nodes(&self, mut n: usize) -> Vec<usize> {
        let mut ids = vec![n];
        while let Some((p, _)) = &self.nodes[n].parent {
            ids.push(*p);
            n = *p;
        }
        ids.reverse();
        ids
    }

    pub fn descendants(&self, n: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack: Vec<usize> = self.nodes[n].children.iter().map(|(_, c)| *c).collect();
        while let Some(d) = stack.pop() {
            if self.nodes[d].removed {
                continue;
            }
            out.push(d);
            stack.extend(self.nodes[d].children.iter().map(|(_, c)| *c));
        }
        out
    }

    pub fn live(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| !n.removed)
    }
}

struct Search<'a> {
    a: &'a Automaton,
    cfg: &'a SearchConfig,
    solver: Solver,
    guard: BudgetGuard,
    art: Art,
    preds: PredicateSet,
    acceptance: Formula,
    stats: RunStats,
    trace: Vec<TraceRecord>,
    interpolants: Vec<Vec<String>>,
}

pub fn check_emptiness_predabs(
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
        art: Art::new(a.init().clone()),
        preds: PredicateSet::new(),
        acceptance: acceptance_conjunct(a),
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
        let path = self.art.path(node).join(".");
        let digest = format!("{:016x}", self.art.nodes[node].label.digest());
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
                self.check_worklist_invariant()?;
            }
            let Some(n) = self.art.worklist.pop_front() else {
                return Ok(Verdict::Empty);
            };
            if self.art.nodes[n].removed {
                continue;
            }
            self.art.nodes[n].queued = false;
            if let Some(kind) = self.guard.check(self.stats.nodes_created, &self.solver) {
                return Ok(Verdict::BudgetExceeded(kind));
            }
            self.art.nodes[n].in_n = true;

            let candidate = Formula::and_s(vec![
                self.art.nodes[n].label.clone(),
                self.acceptance.clone(),
            ]);
            if self.solver.check_sat(&candidate)?.is_sat() {
                let events = self.art.path(n);
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
                        self.refine(n, &events)?;
                    }
                }
            } else {
                self.expand(n)?;
            }
        }
    }

    fn expand(&mut self, n: usize) -> Result<(), SearchError> {
        self.stats.expansions += 1;
        self.art.nodes[n].expanded = true;
        for event in self.a.events().to_vec() {
            let image = post(self.a, &self.art.nodes[n].label, &event)?;
            let phi = abstract_image(&mut self.solver, &image, &self.preds)?;

            // covered by an existing processed node?
            let mut target = None;
            for m in 0..self.art.nodes.len() {
                let cand = &self.art.nodes[m];
                if cand.removed || !cand.in_n {
                    continue;
                }
                if self.solver.entails(&phi, &cand.label)? {
                    target = Some(m);
                    break;
                }
            }
            if let Some(m) = target {
                self.art.nodes[n].cover_out.push(m);
                self.stats.covers += 1;
                self.record(Phase::Cover, n);
                continue;
            }

            let s = self.art.add_child(n, &event, phi.clone());
            self.stats.nodes_created += 1;
            self.record(Phase::Expand, s);

            // antichain sweep: retire queued nodes subsumed by the new one
            let queued: Vec<usize> = self.art.worklist.iter().copied().collect();
            for r in queued {
                let node = &self.art.nodes[r];
                if node.removed || !node.queued || r == s {
                    continue;
                }
                if self.solver.entails(&self.art.nodes[r].label, &phi)? {
                    self.retire_into(r, s);
                }
            }
            self.art.nodes[s].queued = true;
            self.art.worklist.push_back(s);
        }
        Ok(())
    }

    /// Remove a subsumed worklist node, redirecting its parent edge and any
    /// covering edges into the subsuming node.
    fn retire_into(&mut self, r: usize, s: usize) {
        if let Some((p, _)) = self.art.nodes[r].parent.clone() {
            self.art.nodes[p].children.retain(|(_, c)| *c != r);
            if !self.art.nodes[p].cover_out.contains(&s) {
                self.art.nodes[p].cover_out.push(s);
                self.stats.covers += 1;
                self.record(Phase::Cover, p);
            }
        }
        for m in 0..self.art.nodes.len() {
            if self.art.nodes[m].removed {
                continue;
            }
            if self.art.nodes[m].cover_out.contains(&r) {
                self.art.nodes[m].cover_out.retain(|t| *t != r);
                if !self.art.nodes[m].cover_out.contains(&s) {
                    self.art.nodes[m].cover_out.push(s);
                }
            }
        }
        self.art.nodes[r].removed = true;
        self.art.nodes[r].queued = false;
    }

    fn refine(&mut self, n: usize, events: &[String]) -> Result<(), SearchError> {
        self.stats.refinements += 1;
        let (pivot, suffix) = self.find_pivot(n, events)?;
        let seed = self.art.nodes[pivot].label.clone();
        let problem = build_theta_seeded(self.a, &seed, &suffix)?;
        let seq = self.solver.interpolate_sequence(&problem.conjuncts)?;
        let repair = PostRepair::new(self.a, seed.clone(), &suffix);
        let seq = positivize(&seq, &repair)?;
        if self.cfg.verify_interpolants {
            self.solver.verify_sequence(&problem.conjuncts, &seq)?;
        }
        if self.cfg.dump_interpolants {
            self.interpolants
                .push(seq.items().iter().map(|f| f.to_string()).collect());
        }
        for item in seq.items() {
            self.preds.insert(item.clone());
        }
        self.record(Phase::Refine, pivot);

        // tear down the pivot subtree, then conservatively reset any node
        // whose covering pointed into it (recomputed from the edges)
        let mut to_reset: Vec<usize> = Vec::new();
        let mut removal: Vec<usize> = self.art.descendants(pivot);
        loop {
            for d in &removal {
                self.art.nodes[*d].removed = true;
                self.art.nodes[*d].queued = false;
            }
            let mut changed = Vec::new();
            for m in 0..self.art.nodes.len() {
                let node = &self.art.nodes[m];
                if node.removed {
                    continue;
                }
                if node
                    .cover_out
                    .iter()
                    .any(|t| self.art.nodes[*t].removed)
                {
                    changed.push(m);
                }
            }
            if changed.is_empty() {
                break;
            }
            removal = Vec::new();
            for m in changed {
                self.art.nodes[m].cover_out.clear();
                self.art.nodes[m].expanded = false;
                removal.extend(self.art.descendants(m));
                if !to_reset.contains(&m) {
                    to_reset.push(m);
                }
            }
        }
        for (_, c) in std::mem::take(&mut self.art.nodes[pivot].children) {
            debug_assert!(self.art.nodes[c].removed);
        }
        self.art.nodes[pivot].cover_out.clear();
        self.art.nodes[pivot].expanded = false;

        // re-enqueue the pivot first, then uncovered nodes in creation order
        to_reset.retain(|m| !self.art.nodes[*m].removed && *m != pivot);
        to_reset.sort_unstable();
        if !self.art.nodes[pivot].queued {
            self.art.nodes[pivot].queued = true;
            self.art.worklist.push_back(pivot);
        }
        for m in to_reset {
            self.record(Phase::Uncover, m);
            if !self.art.nodes[m].queued {
                self.art.nodes[m].queued = true;
                self.art.worklist.push_back(m);
            }
        }

        if self.cfg.progress_check {
            if abstract_accept_is_sat(self.a, events, &self.preds, &mut self.solver)? {
                return Err(SearchError::Invariant(
                    "abstract acceptance still satisfiable after refinement".into(),
                ));
            }
        }
        if self.cfg.invariant_checks {
            self.check_antichain()?;
        }
        Ok(())
    }

    /// Scan suffixes of the counterexample from the shortest: the first
    /// whose seeded unfolding is unsatisfiable defines the pivot.
    fn find_pivot(
        &mut self,
        n: usize,
        events: &[String],
    ) -> Result<(usize, Vec<String>), SearchError> {
        let path_nodes = self.art.path_nodes(n);
        let k = events.len();
        for len in 1..=k {
            let p = path_nodes[k - len];
            let suffix = events[k - len..].to_vec();
            let label = self.art.nodes[p].label.clone();
            let problem = build_theta_seeded(self.a, &label, &suffix)?;
            if !self.solver.check_sat(&problem.conjunction())?.is_sat() {
                return Ok((p, suffix));
            }
        }
        Err(SearchError::Invariant(
            "spurious counterexample has no infeasible suffix".into(),
        ))
    }

    fn check_worklist_invariant(&self) -> Result<(), SearchError> {
        for node in self.art.live() {
            let frontier = !node.expanded && node.cover_out.is_empty();
            if frontier != node.queued {
                return Err(SearchError::Invariant(format!(
                    "worklist invariant: node {} frontier={} queued={}",
                    node.id, frontier, node.queued
                )));
            }
        }
        Ok(())
    }

    fn check_antichain(&mut self) -> Result<(), SearchError> {
        let queued: Vec<usize> = self.art.worklist.iter().copied().collect();
        for &i in &queued {
            for &j in &queued {
                if i == j || self.art.nodes[i].removed || self.art.nodes[j].removed {
                    continue;
                }
                let (li, lj) = (
                    self.art.nodes[i].label.clone(),
                    self.art.nodes[j].label.clone(),
                );
                if self.solver.entails(&li, &lj)? && !self.solver.entails(&lj, &li)? {
                    return Err(SearchError::Invariant(format!(
                        "worklist labels not an antichain: {} strictly entails {}",
                        i, j
                    )));
                }
            }
        }
        Ok(())
    }
}
