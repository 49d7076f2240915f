//! Command-line frontend. Exit codes: 0 success, 1 domain failure
//! (infeasible schedule, repair non-convergence, failed bench runs), 2 usage
//! or parse error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::bench::{self, render_gantt, GanttFormat, LowerBounds, SuiteOptions};
use crate::model::{build_constraints, cycle_time, parse_instance, validate, FeasibilityReport, Instance, Schedule};
use crate::par::Execution;
use crate::solver::{solve, InitRule, PerturbMode, Restart, SolveError, SolverConfig, Variant};

pub const SCHEDULE_HEADER: &str = "job,op,machine,start,duration";

#[derive(Debug, Parser)]
#[command(name = "cjss", version, about = "Cyclic job shop scheduling by energy descent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one instance and print the best cycle time.
    Solve(SolveArgs),
    /// Check a schedule CSV against an instance.
    Validate(ScheduleArgs),
    /// Run every instance in a directory over several seeds.
    Bench(BenchArgs),
    /// Render a schedule as SVG or text.
    Gantt(GanttArgs),
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long = "K", id = "K")]
    k: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, default_value_t = SolverConfig::default().pi)]
    pi: f64,
    #[arg(long)]
    eta: Option<f64>,
    /// Factor applied to K after each perturbation.
    #[arg(long, default_value_t = SolverConfig::default().k_growth)]
    k_growth: f64,
    #[arg(long, default_value_t = SolverConfig::default().max_iters)]
    max_iters: usize,
    #[arg(long)]
    time_limit_s: Option<f64>,
    /// cdrp, wspt, wlpt or random.
    #[arg(long, default_value = "cdrp")]
    init: InitRule,
    /// displace or jitter.
    #[arg(long, default_value = "displace")]
    perturbation: PerturbMode,
    /// anchor or in-place.
    #[arg(long, default_value = "anchor")]
    restart: Restart,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig, String> {
        let time_limit = match self.time_limit_s {
            Some(t) if !(t >= 0.0 && t.is_finite()) => return Err(format!("bad time limit {t}")),
            t => t.map(Duration::from_secs_f64),
        };
        let cfg = SolverConfig {
            mu: self.mu,
            k: self.k,
            threshold: self.threshold,
            pi: self.pi,
            eta: self.eta,
            k_growth: self.k_growth,
            max_iters: self.max_iters,
            time_limit,
            init: self.init,
            perturbation: self.perturbation,
            restart: self.restart,
            ..SolverConfig::default()
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "rnn")]
    variant: Variant,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    /// Energy trace CSV, one row per sampled iteration.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    trace_every: usize,
    /// Best schedule as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScheduleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    dir: PathBuf,
    /// Lower-bound manifest; the bundled one when omitted.
    #[arg(long)]
    lb: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    seeds: Vec<u64>,
    /// One or more of rnn, lrrnn, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "rnn")]
    variant: Vec<Variant>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    sequential: bool,
    /// Stop each run once it reaches the instance's lower bound.
    #[arg(long)]
    stop_at_lb: bool,
}

#[derive(Debug, Args)]
struct GanttArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long, default_value = "svg")]
    format: GanttFormat,
    /// Standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure carrying its exit code.
struct Exit(i32, String);

fn usage(msg: impl Into<String>) -> Exit {
    Exit(2, msg.into())
}

fn domain(msg: impl Into<String>) -> Exit {
    Exit(1, msg.into())
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("schedule line {line}: {message}")]
pub struct ScheduleCsvError {
    pub line: usize,
    pub message: String,
}

/// `job,op,machine,start,duration` rows in flat op order.
pub fn format_schedule_csv(inst: &Instance, s: &Schedule) -> String {
    let mut out = format!("{SCHEDULE_HEADER}\n");
    for (i, start) in s.starts().iter().enumerate() {
        let id = inst.op_id(i);
        let op = inst.op(i);
        out.push_str(&format!("{},{},{},{start},{}\n", id.job, id.op, op.machine, op.duration));
    }
    out
}

/// Reads a schedule CSV. Rows may come in any order but must name every
/// operation exactly once, with the instance's machine and duration.
pub fn parse_schedule_csv(inst: &Instance, text: &str) -> Result<Schedule, ScheduleCsvError> {
    let err = |line: usize, message: String| ScheduleCsvError { line, message };
    let mut rd = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut records = rd.records();
    match records.next() {
        Some(Ok(h)) if h.iter().eq(SCHEDULE_HEADER.split(',')) => {}
        _ => return Err(err(1, format!("expected header {SCHEDULE_HEADER:?}"))),
    }
    let mut starts: Vec<Option<f64>> = vec![None; inst.op_count()];
    let mut rows = 0;
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| err(line, e.to_string()))?;
        if rec.len() != 5 {
            return Err(err(line, format!("expected 5 fields, found {}", rec.len())));
        }
        let int = |idx: usize| -> Result<usize, ScheduleCsvError> {
            rec[idx].parse().map_err(|_| err(line, format!("bad integer {:?}", &rec[idx])))
        };
        let (job, op, machine, duration) = (int(0)?, int(1)?, int(2)?, int(4)?);
        let start: f64 = rec[3].parse().map_err(|_| err(line, format!("bad start {:?}", &rec[3])))?;
        rows += 1;
        let flat = inst
            .index(crate::model::OpId { job, op })
            .ok_or_else(|| err(line, format!("no operation ({job},{op}) in the instance")))?;
        let expected = inst.op(flat);
        if expected.machine != machine || expected.duration as usize != duration {
            return Err(err(
                line,
                format!("({job},{op}) is machine {} duration {} in the instance", expected.machine, expected.duration),
            ));
        }
        if starts[flat].replace(start).is_some() {
            return Err(err(line, format!("duplicate row for ({job},{op})")));
        }
    }
    if rows != inst.op_count() {
        return Err(err(0, format!("{rows} rows for {} operations", inst.op_count())));
    }
    let starts: Vec<f64> = starts.into_iter().map(|s| s.expect("every op seen")).collect();
    Schedule::new(inst, starts).map_err(|e| err(0, e.to_string()))
}

fn load_instance(path: &Path) -> Result<Instance, Exit> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_instance(&text, &name).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_schedule(inst: &Instance, path: &Path) -> Result<Schedule, Exit> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_schedule_csv(inst, &text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Exit> {
    fs::write(path, contents).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn report_lines(report: &FeasibilityReport) -> Vec<String> {
    let mut lines = Vec::new();
    for v in &report.conjunctive_violations {
        lines.push(format!("conjunctive {} -> {} deficit {}", v.first, v.second, v.amount));
    }
    for v in &report.disjunctive_violations {
        lines.push(format!("disjunctive {} -- {} overlap {}", v.first, v.second, v.amount));
    }
    if !report.cross_cycle_ok {
        lines.push("cross-cycle check failed".into());
    }
    lines
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<(), Exit> {
    let inst = load_instance(&a.instance)?;
    if a.trace_every == 0 {
        return Err(usage("--trace-every must be positive"));
    }
    let cfg = SolverConfig {
        seed: a.seed,
        variant: a.variant,
        trace_every: a.trace.as_ref().map(|_| a.trace_every),
        ..a.solver.config().map_err(usage)?
    };
    let res = solve(&inst, &cfg).map_err(|e| match e {
        SolveError::Config(m) => usage(m),
        SolveError::Repair(r) => domain(r.to_string()),
    })?;
    let _ = writeln!(out, "ct_best={}", res.best_tau);
    let _ = writeln!(out, "iterations={}", res.iterations);
    let _ = writeln!(out, "elapsed_s={:.2}", res.elapsed.as_secs_f64());
    if let Some(path) = &a.trace {
        let mut text = String::from("iteration,energy\n");
        for (it, e) in &res.energy_trace {
            text.push_str(&format!("{it},{e}\n"));
        }
        write_file(path, &text)?;
    }
    if let Some(path) = &a.out {
        write_file(path, &format_schedule_csv(&inst, &res.best_schedule))?;
    }
    Ok(())
}

fn cmd_validate(a: &ScheduleArgs, out: &mut dyn Write) -> Result<(), Exit> {
    let inst = load_instance(&a.instance)?;
    let s = load_schedule(&inst, &a.schedule)?;
    let report = validate(&inst, &build_constraints(&inst), &s);
    if report.feasible {
        let _ = writeln!(out, "feasible, tau={}", cycle_time(&inst, &s));
        Ok(())
    } else {
        for line in report_lines(&report) {
            let _ = writeln!(out, "{line}");
        }
        Err(domain("infeasible"))
    }
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Exit> {
    let cfg = a.solver.config().map_err(usage)?;
    if a.jobs == Some(0) {
        return Err(usage("--jobs must be positive"));
    }
    let bounds = match &a.lb {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            LowerBounds::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => LowerBounds::bundled(),
    };
    let loaded = bench::load_dir(&a.dir, &bounds).map_err(|e| usage(e.to_string()))?;
    for name in &loaded.unknown {
        let _ = writeln!(err, "warning: no lower bound for {name}");
    }
    for e in &loaded.failures {
        let _ = writeln!(err, "error: {e}");
    }
    let opts = SuiteOptions {
        seeds: a.seeds.clone(),
        variants: a.variant.clone(),
        execution: if a.sequential { Execution::Sequential } else { Execution::Parallel },
        threads: a.jobs,
        stop_at_lb: a.stop_at_lb,
    };
    let report = bench::run_suite(&loaded.instances, &cfg, &opts);
    for f in &report.failures {
        let _ = writeln!(err, "error: {} {} seed {}: {}", f.instance, f.variant, f.seed, f.error);
    }
    bench::write_report(&report.rows(), &a.out).map_err(|e| usage(e.to_string()))?;
    for s in report.summary() {
        let fmt = |v: Option<f64>, f: &dyn Fn(f64) -> String| v.map(f).unwrap_or_default();
        let _ = writeln!(
            out,
            "{} {} ct_lb={} ct_best={} mre_pct={}",
            s.instance,
            s.variant,
            fmt(s.ct_lb, &|v| v.to_string()),
            s.ct_best,
            fmt(s.mre(), &|v| format!("{v:.1}"))
        );
    }
    if report.failures.is_empty() && loaded.failures.is_empty() {
        Ok(())
    } else {
        Err(domain(format!("{} run(s) and {} file(s) failed", report.failures.len(), loaded.failures.len())))
    }
}

fn cmd_gantt(a: &GanttArgs, out: &mut dyn Write) -> Result<(), Exit> {
    let inst = load_instance(&a.instance)?;
    let s = load_schedule(&inst, &a.schedule)?;
    let cs = build_constraints(&inst);
    let chart = render_gantt(&inst, &cs, &s, a.format).map_err(|_| {
        let lines = report_lines(&validate(&inst, &cs, &s));
        domain(format!("infeasible schedule\n{}", lines.join("\n")))
    })?;
    match &a.out {
        Some(path) => write_file(path, &chart),
        None => out.write_all(chart.as_bytes()).map_err(|e| domain(e.to_string())),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Validate(a) => cmd_validate(a, out),
        Command::Bench(a) => cmd_bench(a, out, err),
        Command::Gantt(a) => cmd_gantt(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(Exit(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}
