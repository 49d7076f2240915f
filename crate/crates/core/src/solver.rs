//! Recurrent descent dynamics on the schedule energy.
//!
//! Each iteration moves every start time against the energy gradient,
//! repairs and compacts a copy of the state to track the best feasible
//! schedule, and perturbs the state once the energy stops changing.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::energy::{self, DualState};
use crate::init::{cdrp_with_rule, list_schedule, DispatchRule, RuleKind};
use crate::model::{build_constraints, cycle_time, ConstraintSet, Instance, Schedule};
use crate::repair::{RepairError, Scratch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    /// Penalty energy only.
    #[default]
    Rnn,
    /// Penalty energy plus a multiplier term raised by dual ascent at each stall.
    Lrrnn,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Rnn => "RNN",
            Variant::Lrrnn => "LRRNN",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rnn" => Ok(Variant::Rnn),
            "lrrnn" => Ok(Variant::Lrrnn),
            other => Err(format!("unknown variant {other:?}")),
        }
    }
}

/// Where the descent starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitRule {
    #[default]
    Cdrp,
    Rule(RuleKind),
}

impl FromStr for InitRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("cdrp") {
            Ok(InitRule::Cdrp)
        } else {
            s.parse().map(InitRule::Rule)
        }
    }
}

/// How a stall perturbs the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PerturbMode {
    /// `s + (p + dp) * u`: pushes every op right by roughly its own length,
    /// enough to reorder machine neighbours.
    #[default]
    Displace,
    /// `s + dp * u`: symmetric jitter only, see [`perturb`].
    Jitter,
}

impl FromStr for PerturbMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "displace" => Ok(PerturbMode::Displace),
            "jitter" => Ok(PerturbMode::Jitter),
            other => Err(format!("unknown perturbation {other:?}")),
        }
    }
}

/// State the descent resumes from after a stall, before perturbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Restart {
    /// The most recent repaired schedule whose cycle time tied or beat the
    /// incumbent.
    #[default]
    Anchor,
    /// The raw descent state, never repaired.
    InPlace,
}

impl FromStr for Restart {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "anchor" => Ok(Restart::Anchor),
            "in-place" | "inplace" => Ok(Restart::InPlace),
            other => Err(format!("unknown restart policy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Repair(#[from] RepairError),
}

/// Solver parameters. `None` scales from the instance:
/// `mu = 8e-3 * mean(p)`, `k = 2 / mean(p)`, `eta = 0.03 / mean(p)`,
/// `threshold = 1e-4 * E0`.
///
/// `k` and `eta` carry units of inverse time, so `mu * k` and the multiplier
/// growth per stall stay fixed across instances of different duration
/// scales.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mu: Option<f64>,
    pub k: Option<f64>,
    pub threshold: Option<f64>,
    pub pi: f64,
    pub eta: Option<f64>,
    /// Factor applied to `k` after every perturbation.
    pub k_growth: f64,
    pub k_max: f64,
    pub max_iters: usize,
    pub time_limit: Option<Duration>,
    pub seed: u64,
    pub variant: Variant,
    pub init: InitRule,
    pub perturbation: PerturbMode,
    pub restart: Restart,
    /// Stop as soon as the incumbent reaches this cycle time.
    pub target: Option<f64>,
    /// Record `(iteration, E)` every this many iterations.
    pub trace_every: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mu: None,
            k: None,
            threshold: None,
            pi: 1.0,
            eta: None,
            k_growth: 1.0,
            k_max: 1e6,
            max_iters: 100_000,
            time_limit: None,
            seed: 1,
            variant: Variant::Rnn,
            init: InitRule::Cdrp,
            perturbation: PerturbMode::Displace,
            restart: Restart::Anchor,
            target: None,
            trace_every: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => {
                Err(SolveError::Config(format!("{name} must be positive, got {x}")))
            }
            _ => Ok(()),
        };
        positive("mu", self.mu)?;
        positive("K", self.k)?;
        positive("threshold", self.threshold)?;
        positive("eta", self.eta)?;
        positive("k_max", Some(self.k_max))?;
        if !(0.0..=1.0).contains(&self.pi) {
            return Err(SolveError::Config(format!("pi must lie in [0, 1], got {}", self.pi)));
        }
        if !(self.k_growth >= 1.0 && self.k_growth.is_finite()) {
            return Err(SolveError::Config(format!("k_growth must be at least 1, got {}", self.k_growth)));
        }
        if self.trace_every == Some(0) {
            return Err(SolveError::Config("trace interval must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub best_schedule: Schedule,
    pub best_tau: f64,
    pub iterations: usize,
    pub best_iteration: usize,
    pub elapsed: Duration,
    pub energy_trace: Vec<(usize, f64)>,
    /// `(iteration, tau)` each time the incumbent improved, starting with the
    /// initial schedule at iteration 0.
    pub improvements: Vec<(usize, f64)>,
    pub perturbations: usize,
    pub seed: u64,
    pub init_rule: RuleKind,
    pub init_tau: f64,
}

/// One step of `S <- max(0, S - mu * dE/dS)`.
///
/// With `dual` set, the gradient includes the multiplier term.
pub fn descent_step(
    inst: &Instance,
    cs: &ConstraintSet,
    s: &Schedule,
    mu: f64,
    k: f64,
    dual: Option<&DualState>,
) -> Schedule {
    let mut next = s.clone();
    let mut grad = vec![0.0; s.len()];
    step_in_place(inst, cs, &mut next, &mut grad, mu, k, dual.map(DualState::multipliers));
    next
}

fn step_in_place(
    inst: &Instance,
    cs: &ConstraintSet,
    s: &mut Schedule,
    grad: &mut [f64],
    mu: f64,
    k: f64,
    multipliers: Option<&[f64]>,
) {
    energy::gradient_into(inst, cs, s, k, multipliers, grad);
    for (v, g) in s.starts_mut().iter_mut().zip(grad.iter()) {
        *v = (*v - mu * g).max(0.0);
    }
}

/// True when the last two energy changes are both below `threshold` in magnitude.
pub fn detect_stall(history: &[f64], threshold: f64) -> bool {
    match history {
        [.., a, b, c] => (b - a).abs() < threshold && (c - b).abs() < threshold,
        _ => false,
    }
}

/// Jitters every start by `u * d` with `d ~ U(-pi p, pi p)` and `u ~ U(0, 1)`,
/// clamped at zero.
pub fn perturb<R: Rng + ?Sized>(inst: &Instance, s: &Schedule, pi: f64, rng: &mut R) -> Schedule {
    perturb_with(inst, s, pi, PerturbMode::Jitter, rng)
}

/// [`perturb`] with an explicit mode. `Displace` moves every start by
/// `(p + dp) * u`, so each shift lies in `[0, (1 + pi) p]`.
pub fn perturb_with<R: Rng + ?Sized>(
    inst: &Instance,
    s: &Schedule,
    pi: f64,
    mode: PerturbMode,
    rng: &mut R,
) -> Schedule {
    let mut out = s.clone();
    perturb_in_place(inst, &mut out, pi, mode, rng);
    out
}

fn perturb_in_place<R: Rng + ?Sized>(inst: &Instance, s: &mut Schedule, pi: f64, mode: PerturbMode, rng: &mut R) {
    for (i, v) in s.starts_mut().iter_mut().enumerate() {
        let p = inst.duration(i);
        let half = pi * p;
        let jitter: f64 = rng.random_range(-half..=half);
        let damp: f64 = rng.random();
        let base = match mode {
            PerturbMode::Displace => p,
            PerturbMode::Jitter => 0.0,
        };
        *v = (*v + (base + jitter) * damp).max(0.0);
    }
}

/// Initial schedule for a configuration.
pub fn initial_schedule(inst: &Instance, cfg: &SolverConfig) -> (RuleKind, Schedule) {
    match cfg.init {
        InitRule::Cdrp => cdrp_with_rule(inst, cfg.seed),
        InitRule::Rule(kind) => {
            let s = list_schedule(inst, &DispatchRule::new(kind), cfg.seed).expect("unit weights always match");
            (kind, s)
        }
    }
}

pub fn solve(inst: &Instance, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
    let cs = build_constraints(inst);
    solve_with(inst, &cs, cfg)
}

/// [`solve`] with a prebuilt constraint set, for callers sharing one across runs.
pub fn solve_with(inst: &Instance, cs: &ConstraintSet, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
    cfg.validate()?;
    let clock = Instant::now();
    let (init_rule, init) = initial_schedule(inst, cfg);
    let init_tau = cycle_time(inst, &init);

    let mut best = init.clone();
    let mut best_tau = init_tau;
    let mut best_iteration = 0;
    let mut improvements = vec![(0, init_tau)];
    let mut energy_trace = Vec::new();
    let mut perturbations = 0;

    let mu = cfg.mu.unwrap_or(8e-3 * inst.mean_duration());
    let mut k = cfg.k.unwrap_or(2.0 / inst.mean_duration());
    let mut dual = match cfg.variant {
        Variant::Rnn => None,
        Variant::Lrrnn => {
            let eta = cfg.eta.unwrap_or(0.03 / inst.mean_duration());
            Some(DualState::new(cs.xi(), eta).map_err(|e| SolveError::Config(e.to_string()))?)
        }
    };
    let e0 = energy::total_energy(inst, cs, &init, k, None);
    let threshold = cfg.threshold.unwrap_or(1e-4 * e0.abs().max(f64::MIN_POSITIVE));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = init;
    let mut grad = vec![0.0; inst.op_count()];
    let mut work = vec![0.0; inst.op_count()];
    let mut anchor = state.starts().to_vec();
    let mut scratch = Scratch::new(inst);
    let mut history: Vec<f64> = Vec::with_capacity(3);
    let reached = |tau: f64| cfg.target.is_some_and(|t| tau <= t);

    let mut iterations = 0;
    if cfg.trace_every.is_some() {
        energy_trace.push((0, e0));
    }
    while iterations < cfg.max_iters && !reached(best_tau) {
        if cfg.time_limit.is_some_and(|lim| clock.elapsed() >= lim) {
            break;
        }
        iterations += 1;
        let multipliers = dual.as_ref().map(DualState::multipliers);
        step_in_place(inst, cs, &mut state, &mut grad, mu, k, multipliers);
        let e = energy::total_energy(inst, cs, &state, k, multipliers);

        work.copy_from_slice(state.starts());
        scratch.repair_and_compact(inst, cs, &mut work)?;
        let tau = max_completion(inst, &work);
        if tau <= best_tau {
            anchor.copy_from_slice(&work);
        }
        if tau < best_tau {
            best_tau = tau;
            best_iteration = iterations;
            best = Schedule::from_raw(work.clone());
            improvements.push((iterations, tau));
        }

        if cfg.trace_every.is_some_and(|every| iterations % every == 0) {
            energy_trace.push((iterations, e));
        }

        if history.len() == 3 {
            history.remove(0);
        }
        history.push(e);
        if detect_stall(&history, threshold) {
            // dual ascent at the settled state, before it is replaced
            if let Some(d) = dual.as_mut() {
                let r = energy::residuals(inst, cs, &state);
                d.update(&r).expect("one residual per multiplier");
            }
            if cfg.restart == Restart::Anchor {
                state.starts_mut().copy_from_slice(&anchor);
            }
            perturb_in_place(inst, &mut state, cfg.pi, cfg.perturbation, &mut rng);
            k = (k * cfg.k_growth).min(cfg.k_max);
            history.clear();
            perturbations += 1;
        }
    }

    Ok(SolveResult {
        best_schedule: best,
        best_tau,
        iterations,
        best_iteration,
        elapsed: clock.elapsed(),
        energy_trace,
        improvements,
        perturbations,
        seed: cfg.seed,
        init_rule,
        init_tau,
    })
}

/// Cycle time of a compacted schedule, whose earliest start is zero.
fn max_completion(inst: &Instance, starts: &[f64]) -> f64 {
    starts.iter().enumerate().map(|(i, s)| s + inst.duration(i)).fold(0.0, f64::max)
}
