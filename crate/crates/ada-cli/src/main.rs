//! Command-line front end: emptiness checking, membership, boolean
//! operations, language inclusion and a benchmark harness over the
//! `.ada` format.
//!
//! Exit codes: `0` empty / accepted / included / success, `1` nonempty /
//! rejected / not included / expectation mismatch, `2` budget exceeded,
//! `64` usage, `65` parse or validation failure, `66` I/O failure,
//! `70` internal error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ada_core::automaton::{boolean_combine, complement, membership, Automaton, BooleanOp};
use ada_core::bench::{bench_one, corpus_files, format_table, load_automaton, parse_expected};
use ada_core::impact::check_emptiness_impact;
use ada_core::predabs::check_emptiness_predabs;
use ada_core::report::{RunBudget, RunReport, SearchConfig, Verdict};
use ada_core::smt::{InterpolationStrategy, Solver};
use ada_core::symbolic::{bounded_oracle, BoundedOutcome};
use ada_core::syntax::{parse_automaton, parse_word, print_automaton, print_word};

#[derive(Parser)]
#[command(name = "ada", version, about = "Alternating data automata toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Impact,
    Predabs,
    Oracle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Proof,
    ExactPost,
}

#[derive(Args, Clone)]
struct BudgetArgs {
    /// Node limit for the search tree.
    #[arg(long, default_value_t = 10_000)]
    max_nodes: usize,
    /// Limit on satisfiability and entailment queries.
    #[arg(long, default_value_t = 100_000)]
    max_solver_calls: u64,
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
    /// Interpolation strategy.
    #[arg(long, value_enum, default_value_t = Strategy::Proof)]
    strategy: Strategy,
    /// Re-check each interpolation sequence against its contract.
    #[arg(long)]
    verify_interpolants: bool,
}

impl BudgetArgs {
    fn search_config(&self) -> SearchConfig {
        SearchConfig {
            budget: RunBudget {
                max_nodes: self.max_nodes,
                max_solver_calls: self.max_solver_calls,
                timeout: Duration::from_secs(self.timeout_secs),
            },
            strategy: match self.strategy {
                Strategy::Proof => InterpolationStrategy::Proof,
                Strategy::ExactPost => InterpolationStrategy::ExactPost,
            },
            verify_interpolants: self.verify_interpolants || cfg!(debug_assertions),
            ..SearchConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide language emptiness.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Impact)]
        method: Method,
        /// Length bound for the oracle method.
        #[arg(long, default_value_t = 6)]
        bound: u32,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Write a line-delimited JSON trace of search events.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Dump every interpolation sequence to stderr.
        #[arg(long)]
        dump_interpolants: bool,
    },
    /// Test whether a word file is accepted.
    Member { automaton: PathBuf, word: PathBuf },
    /// Boolean operations; the result prints to stdout or `-o`.
    Op {
        #[arg(value_enum)]
        operation: Operation,
        left: PathBuf,
        right: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Language inclusion of the first automaton in the second, by
    /// complementation, intersection and emptiness.
    Include {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Impact)]
        method: Method,
        #[arg(long, default_value_t = 6)]
        bound: u32,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Run both emptiness procedures over every `.ada` file in a
    /// directory and print a results table.
    Bench {
        dir: PathBuf,
        /// Compare verdicts against a `name<TAB>verdict` file.
        #[arg(long)]
        expected: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Operation {
    Union,
    Intersect,
    Complement,
}

const EXIT_BUDGET: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_IO: u8 = 66;
const EXIT_INTERNAL: u8 = 70;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.exit_code() == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_USAGE)
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {:#}", e);
            let code = if e.is::<std::io::Error>() {
                EXIT_IO
            } else if e.downcast_ref::<ada_core::syntax::ParseError>().is_some() {
                EXIT_DATA
            } else {
                EXIT_INTERNAL
            };
            ExitCode::from(code)
        }
    }
}

fn load(path: &Path) -> anyhow::Result<Automaton> {
    let text = fs::read_to_string(path)?;
    let a = parse_automaton(&text)?;
    Ok(a)
}

fn run_method(
    a: &Automaton,
    method: Method,
    bound: u32,
    cfg: &SearchConfig,
) -> anyhow::Result<(Verdict, Option<RunReport>)> {
    match method {
        Method::Impact => {
            let r = check_emptiness_impact(a, cfg)?;
            Ok((r.verdict.clone(), Some(r)))
        }
        Method::Predabs => {
            let r = check_emptiness_predabs(a, cfg)?;
            Ok((r.verdict.clone(), Some(r)))
        }
        Method::Oracle => {
            let mut solver = Solver::default();
            let v = match bounded_oracle(a, bound, &mut solver)? {
                BoundedOutcome::Witness(w) => Verdict::Nonempty(w),
                BoundedOutcome::EmptyUpTo(_) => Verdict::Empty,
            };
            Ok((v, None))
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Check {
            file,
            method,
            bound,
            budget,
            trace,
            dump_interpolants,
        } => {
            let a = load(&file)?;
            let mut cfg = budget.search_config();
            cfg.collect_trace = trace.is_some();
            cfg.dump_interpolants = dump_interpolants;
            let (verdict, report) = run_method(&a, method, bound, &cfg)?;
            if let (Some(path), Some(report)) = (trace.as_ref(), report.as_ref()) {
                let mut f = fs::File::create(path)?;
                for rec in &report.trace {
                    writeln!(f, "{}", serde_json::to_string(rec)?)?;
                }
            }
            if let Some(report) = report.as_ref() {
                if dump_interpolants {
                    for (i, seq) in report.interpolants.iter().enumerate() {
                        eprintln!("refinement {}:", i);
                        for item in seq {
                            eprintln!("  {}", item);
                        }
                    }
                }
                eprintln!(
                    "nodes={} solver-calls={} refinements={} wall-ms={}",
                    report.stats.nodes_created,
                    report.stats.solver_calls,
                    report.stats.refinements,
                    report.stats.wall_millis
                );
            }
            match verdict {
                Verdict::Empty => {
                    println!("empty");
                    if method == Method::Oracle {
                        println!("# up to length {}", bound);
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Verdict::Nonempty(w) => {
                    println!("nonempty");
                    print!("{}", print_word(&w, &a));
                    Ok(ExitCode::from(1))
                }
                Verdict::BudgetExceeded(kind) => {
                    println!("budget-exceeded ({:?})", kind);
                    Ok(ExitCode::from(EXIT_BUDGET))
                }
            }
        }
        Command::Member { automaton, word } => {
            let a = load(&automaton)?;
            let text = fs::read_to_string(&word)?;
            let w = parse_word(&text, &a)?;
            let mut solver = Solver::default();
            if membership(&a, &w, &mut solver)? {
                println!("accepted");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("rejected");
                Ok(ExitCode::from(1))
            }
        }
        Command::Op {
            operation,
            left,
            right,
            output,
        } => {
            let a = load(&left)?;
            let result = match operation {
                Operation::Complement => {
                    if right.is_some() {
                        anyhow::bail!("complement takes one automaton");
                    }
                    complement(&a)?
                }
                Operation::Union | Operation::Intersect => {
                    let Some(rp) = right else {
                        anyhow::bail!("this operation takes two automata");
                    };
                    let b = load(&rp)?;
                    let op = if operation == Operation::Union {
                        BooleanOp::Union
                    } else {
                        BooleanOp::Intersection
                    };
                    boolean_combine(&a, &b, op)?
                }
            };
            let text = print_automaton(&result);
            match output {
                Some(path) => fs::write(path, text)?,
                None => print!("{}", text),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Include {
            left,
            right,
            method,
            bound,
            budget,
        } => {
            let a = load(&left)?;
            let b = load(&right)?;
            let not_b = complement(&b)?;
            let product = boolean_combine(&a, &not_b, BooleanOp::Intersection)?;
            let cfg = budget.search_config();
            let (verdict, _) = run_method(&product, method, bound, &cfg)?;
            match verdict {
                Verdict::Empty => {
                    println!("included");
                    Ok(ExitCode::SUCCESS)
                }
                Verdict::Nonempty(w) => {
                    println!("not included");
                    print!("{}", print_word(&w, &product));
                    Ok(ExitCode::from(1))
                }
                Verdict::BudgetExceeded(kind) => {
                    println!("budget-exceeded ({:?})", kind);
                    Ok(ExitCode::from(EXIT_BUDGET))
                }
            }
        }
        Command::Bench {
            dir,
            expected,
            budget,
        } => {
            let cfg = budget.search_config();
            let mut rows = Vec::new();
            for path in corpus_files(&dir)? {
                let a = load_automaton(&path)?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                rows.push(bench_one(&name, &a, &cfg)?);
            }
            print!("{}", format_table(&rows));
            if let Some(exp_path) = expected {
                let exp = parse_expected(&fs::read_to_string(&exp_path)?);
                let mut ok = true;
                for (name, want) in &exp {
                    let Some(row) = rows.iter().find(|r| &r.name == name) else {
                        eprintln!("expected file names unknown instance {}", name);
                        ok = false;
                        continue;
                    };
                    for (method, got) in
                        [("predabs", &row.predabs.verdict), ("impact", &row.impact.verdict)]
                    {
                        if got != want {
                            eprintln!(
                                "verdict mismatch on {} ({}): expected {}, got {}",
                                name, method, want, got
                            );
                            ok = false;
                        }
                    }
                }
                if !ok {
                    return Ok(ExitCode::from(1));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
