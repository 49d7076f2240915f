//! Benchmark harness: multi-seed suite runs, deviation metrics, CSV reports
//! and Gantt renderings.

mod gantt;
mod manifest;
mod report;

use std::cmp::Ordering;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{build_constraints, cycle_time, is_feasible, parse_instance, Instance, ParseError, Schedule};
use crate::par::{self, Execution};
use crate::solver::{solve_with, SolveError, SolverConfig, Variant};

pub use gantt::{render_gantt, GanttFormat};
pub use manifest::LowerBounds;
pub use report::{read_report, write_report, REPORT_HEADER};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("report line {line}: {message}")]
    Report { line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("optimal value must be positive, got {0}")]
    NonPositiveOptimal(f64),
    #[error("schedule is infeasible")]
    Infeasible,
    #[error("{instance}: {source}")]
    Solve {
        instance: String,
        #[source]
        source: SolveError,
    },
}

/// Percentage deviation `100 (best - optimal) / optimal`.
pub fn deviation(best: f64, optimal: f64) -> Result<f64, BenchError> {
    if optimal.is_nan() || optimal <= 0.0 {
        return Err(BenchError::NonPositiveOptimal(optimal));
    }
    Ok(100.0 * (best - optimal) / optimal)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub instance: String,
    pub variant: Variant,
    pub seed: u64,
    pub ct_lb: Option<f64>,
    pub ct_best: f64,
    pub it_best: usize,
    pub elapsed_s: f64,
}

impl BenchmarkRow {
    /// Deviation from the lower bound, when one is known.
    pub fn mre(&self) -> Option<f64> {
        self.ct_lb.and_then(|lb| deviation(self.ct_best, lb).ok())
    }
}

#[derive(Debug, Clone)]
pub struct SuiteInstance {
    pub name: String,
    pub instance: Instance,
    pub ct_lb: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub seeds: Vec<u64>,
    pub variants: Vec<Variant>,
    pub execution: Execution,
    /// Worker count for a dedicated pool; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Stop each run once it reaches the instance's lower bound.
    pub stop_at_lb: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seeds: vec![1],
            variants: vec![Variant::Rnn],
            execution: Execution::Parallel,
            threads: None,
            stop_at_lb: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Run {
    pub row: BenchmarkRow,
    pub schedule: Schedule,
}

#[derive(Debug)]
pub struct Failure {
    pub instance: String,
    pub variant: Variant,
    pub seed: u64,
    pub error: BenchError,
}

#[derive(Debug, Default)]
pub struct SuiteReport {
    /// Sorted by (instance, variant, seed).
    pub runs: Vec<Run>,
    pub failures: Vec<Failure>,
}

impl SuiteReport {
    pub fn rows(&self) -> Vec<BenchmarkRow> {
        self.runs.iter().map(|r| r.row.clone()).collect()
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        summarize(self.runs.iter().map(|r| &r.row))
    }
}

/// Best-of-seeds result for one (instance, variant).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub instance: String,
    pub variant: Variant,
    pub ct_lb: Option<f64>,
    pub ct_best: f64,
    pub best_seed: u64,
    pub seeds: usize,
}

impl SummaryRow {
    pub fn mre(&self) -> Option<f64> {
        self.ct_lb.and_then(|lb| deviation(self.ct_best, lb).ok())
    }
}

/// Groups rows by (instance, variant) in first-seen order; the lowest seed
/// wins ties.
pub fn summarize<'a>(rows: impl IntoIterator<Item = &'a BenchmarkRow>) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    for row in rows {
        match out.iter_mut().find(|s| s.instance == row.instance && s.variant == row.variant) {
            Some(s) => {
                s.seeds += 1;
                if row.ct_best < s.ct_best || (row.ct_best == s.ct_best && row.seed < s.best_seed) {
                    s.ct_best = row.ct_best;
                    s.best_seed = row.seed;
                }
            }
            None => out.push(SummaryRow {
                instance: row.instance.clone(),
                variant: row.variant,
                ct_lb: row.ct_lb,
                ct_best: row.ct_best,
                best_seed: row.seed,
                seeds: 1,
            }),
        }
    }
    out
}

fn row_order(a: &BenchmarkRow, b: &BenchmarkRow) -> Ordering {
    (a.instance.as_str(), a.variant.as_str(), a.seed).cmp(&(b.instance.as_str(), b.variant.as_str(), b.seed))
}

/// Solves every instance under every (variant, seed) pair.
///
/// Runs are independent and may execute in parallel; failures are collected
/// per run and never abort the suite. `cfg.seed` and `cfg.variant` are
/// overridden per run.
pub fn run_suite(instances: &[SuiteInstance], cfg: &SolverConfig, opts: &SuiteOptions) -> SuiteReport {
    let constraints: Vec<_> = instances.iter().map(|s| build_constraints(&s.instance)).collect();
    let mut jobs = Vec::new();
    for idx in 0..instances.len() {
        for &variant in &opts.variants {
            for &seed in &opts.seeds {
                jobs.push((idx, variant, seed));
            }
        }
    }

    let results = par::with_threads(opts.threads, || {
        par::map(&jobs, opts.execution, |&(idx, variant, seed)| {
            let entry = &instances[idx];
            let mut run_cfg = cfg.clone();
            run_cfg.seed = seed;
            run_cfg.variant = variant;
            if opts.stop_at_lb && entry.ct_lb.is_some() {
                run_cfg.target = entry.ct_lb;
            }
            let res = solve_with(&entry.instance, &constraints[idx], &run_cfg)
                .map_err(|source| BenchError::Solve { instance: entry.name.clone(), source })?;
            if !is_feasible(&entry.instance, &constraints[idx], &res.best_schedule) {
                return Err(BenchError::Infeasible);
            }
            Ok(Run {
                row: BenchmarkRow {
                    instance: entry.name.clone(),
                    variant,
                    seed,
                    ct_lb: entry.ct_lb,
                    ct_best: cycle_time(&entry.instance, &res.best_schedule),
                    it_best: res.best_iteration,
                    elapsed_s: res.elapsed.as_secs_f64(),
                },
                schedule: res.best_schedule,
            })
        })
    });

    let mut report = SuiteReport::default();
    for (&(idx, variant, seed), result) in jobs.iter().zip(results) {
        match result {
            Ok(run) => report.runs.push(run),
            Err(error) => report.failures.push(Failure { instance: instances[idx].name.clone(), variant, seed, error }),
        }
    }
    report.runs.sort_by(|a, b| row_order(&a.row, &b.row));
    report
}

/// Instances found in a directory, plus files that failed to load.
#[derive(Debug, Default)]
pub struct LoadedSuite {
    pub instances: Vec<SuiteInstance>,
    pub failures: Vec<BenchError>,
    /// Instance names with no entry in the manifest.
    pub unknown: Vec<String>,
}

/// Reads every regular, non-hidden file in `dir` as an instance named by its
/// file stem, in name order.
pub fn load_dir(dir: &Path, bounds: &LowerBounds) -> Result<LoadedSuite, BenchError> {
    let io = |source| BenchError::Io { path: dir.to_path_buf(), source };
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let entry = entry.map_err(io)?;
        let path = entry.path();
        let hidden = entry.file_name().to_string_lossy().starts_with('.');
        if !hidden && entry.file_type().map_err(io)?.is_file() {
            paths.push(path);
        }
    }
    paths.sort();

    let mut out = LoadedSuite::default();
    for path in paths {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(source) => {
                out.failures.push(BenchError::Io { path, source });
                continue;
            }
        };
        match parse_instance(&text, &name) {
            Ok(instance) => {
                let ct_lb = bounds.get(&name);
                if ct_lb.is_none() {
                    out.unknown.push(name.clone());
                }
                out.instances.push(SuiteInstance { name, instance, ct_lb });
            }
            Err(source) => out.failures.push(BenchError::Parse { path, source }),
        }
    }
    Ok(out)
}
