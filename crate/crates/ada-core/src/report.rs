//! Budgets, verdicts, statistics and trace records shared by both
//! emptiness procedures.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::automaton::{AutomatonError, DataWord};
use crate::smt::{InterpolationStrategy, Solver, SolverConfig, SolverError};

/// Resource limits for one emptiness run.
#[derive(Debug, Clone)]
pub struct RunBudget {
    pub max_nodes: usize,
    pub max_solver_calls: u64,
    pub timeout: Duration,
}

impl Default for RunBudget {
    fn default() -> Self {
        RunBudget {
            max_nodes: 10_000,
            max_solver_calls: 100_000,
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BudgetKind {
    Nodes,
    SolverCalls,
    Time,
}

/// Result of an emptiness run. These are semi-algorithms: a budget exit is
/// a first-class outcome, distinct from both verdicts.
#[derive(Debug, Clone)]
pub enum Verdict {
    Empty,
    Nonempty(DataWord),
    BudgetExceeded(BudgetKind),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Empty => "empty",
            Verdict::Nonempty(_) => "nonempty",
            Verdict::BudgetExceeded(_) => "budget-exceeded",
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunStats {
    pub nodes_created: usize,
    pub expansions: usize,
    pub covers: usize,
    pub refinements: usize,
    pub solver_calls: u64,
    pub interpolants_verified: u64,
    pub wall_millis: u128,
}

/// One structured trace record per search event.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub phase: Phase,
    pub node: usize,
    pub path: String,
    pub digest: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Expand,
    Cover,
    Uncover,
    Refine,
    Close,
    Strengthen,
    Witness,
    Drop,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub budget: RunBudget,
    pub strategy: InterpolationStrategy,
    /// Re-check every interpolation sequence against its contract.
    pub verify_interpolants: bool,
    /// Replay the abstract acceptance after each refinement and fail hard
    /// if it is still satisfiable (progress property); test instrumentation.
    pub progress_check: bool,
    /// Check structural invariants (worklist, antichain, well-labeledness)
    /// at loop heads; expensive, test instrumentation.
    pub invariant_checks: bool,
    pub collect_trace: bool,
    /// Record every positivized interpolation sequence in the report, in
    /// the shared s-expression syntax.
    pub dump_interpolants: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: RunBudget::default(),
            strategy: InterpolationStrategy::Proof,
            verify_interpolants: cfg!(debug_assertions),
            progress_check: false,
            invariant_checks: false,
            collect_trace: false,
            dump_interpolants: false,
        }
    }
}

impl SearchConfig {
    pub fn solver_config(&self, deadline: Instant) -> SolverConfig {
        SolverConfig {
            deadline: Some(deadline),
            strategy: self.strategy,
            verify_interpolants: self.verify_interpolants,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub verdict: Verdict,
    pub stats: RunStats,
    pub trace: Vec<TraceRecord>,
    /// One entry per refinement when dumping is enabled: the positivized
    /// sequence, each element printed in the shared syntax.
    pub interpolants: Vec<Vec<String>>,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Automaton(#[from] AutomatonError),

    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// Wall-clock and counter tracking for one run.
pub struct BudgetGuard {
    pub start: Instant,
    pub deadline: Instant,
    budget: RunBudget,
}

impl BudgetGuard {
    pub fn new(budget: RunBudget) -> Self {
        let start = Instant::now();
        BudgetGuard {
            start,
            deadline: start + budget.timeout,
            budget,
        }
    }

    pub fn check(&self, nodes_created: usize, solver: &Solver) -> Option<BudgetKind> {
        if nodes_created > self.budget.max_nodes {
            return Some(BudgetKind::Nodes);
        }
        if solver.stats.sat_checks + solver.stats.entailment_checks
            > self.budget.max_solver_calls
        {
            return Some(BudgetKind::SolverCalls);
        }
        if Instant::now() >= self.deadline {
            return Some(BudgetKind::Time);
        }
        None
    }

    pub fn elapsed_millis(&self) -> u128 {
        self.start.elapsed().as_millis()
    }
}
