//! Batch harness: run both emptiness procedures over a directory of
//! automata and tabulate verdicts and statistics.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::automaton::Automaton;
use crate::impact::check_emptiness_impact;
use crate::predabs::check_emptiness_predabs;
use crate::report::{RunReport, SearchConfig, SearchError, Verdict};
use crate::syntax::{parse_automaton, ParseError};

#[derive(Debug, Clone, Serialize)]
pub struct MethodResult {
    pub verdict: String,
    pub witness_len: Option<usize>,
    pub nodes: usize,
    pub solver_calls: u64,
    pub refinements: usize,
    pub millis: u128,
}

impl MethodResult {
    fn of(report: &RunReport) -> Self {
        MethodResult {
            verdict: report.verdict.label().to_string(),
            witness_len: match &report.verdict {
                Verdict::Nonempty(w) => Some(w.len()),
                _ => None,
            },
            nodes: report.stats.nodes_created,
            solver_calls: report.stats.solver_calls,
            refinements: report.stats.refinements,
            millis: report.stats.wall_millis,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub name: String,
    pub size: u64,
    pub predabs: MethodResult,
    pub impact: MethodResult,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{path}: {err}")]
    Parse { path: PathBuf, err: ParseError },

    #[error("{path}: {err}")]
    Search { path: PathBuf, err: SearchError },
}

/// All `.ada` files in a directory, sorted by name.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map_or(false, |x| x == "ada"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn load_automaton(path: &Path) -> Result<Automaton, BenchError> {
    let text = fs::read_to_string(path)?;
    parse_automaton(&text).map_err(|err| BenchError::Parse {
        path: path.to_path_buf(),
        err,
    })
}

/// Run both procedures on one automaton.
pub fn bench_one(
    name: &str,
    a: &Automaton,
    cfg: &SearchConfig,
) -> Result<BenchRow, SearchError> {
    let pa = check_emptiness_predabs(a, cfg)?;
    let im = check_emptiness_impact(a, cfg)?;
    Ok(BenchRow {
        name: name.to_string(),
        size: a.size(),
        predabs: MethodResult::of(&pa),
        impact: MethodResult::of(&im),
    })
}

pub fn run_bench(dir: &Path, cfg: &SearchConfig) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::new();
    for path in corpus_files(dir)? {
        let a = load_automaton(&path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let row = bench_one(&name, &a, cfg).map_err(|err| BenchError::Search {
            path: path.clone(),
            err,
        })?;
        rows.push(row);
    }
    Ok(rows)
}

/// Render rows as a tab-separated table, deterministic modulo the time
/// columns.
pub fn format_table(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "name\tsize\tpredabs\tpa_nodes\tpa_calls\tpa_refines\tpa_ms\timpact\tim_nodes\tim_calls\tim_refines\tim_ms\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.name,
            r.size,
            r.predabs.verdict,
            r.predabs.nodes,
            r.predabs.solver_calls,
            r.predabs.refinements,
            r.predabs.millis,
            r.impact.verdict,
            r.impact.nodes,
            r.impact.solver_calls,
            r.impact.refinements,
            r.impact.millis,
        ));
    }
    out
}

/// Parse an expected-verdicts file: `name<TAB>verdict` per line, `#`
/// comments allowed.
pub fn parse_expected(src: &str) -> Vec<(String, String)> {
    src.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .filter_map(|l| {
            let mut cols = l.split_whitespace();
            Some((cols.next()?.to_string(), cols.next()?.to_string()))
        })
        .collect()
}
