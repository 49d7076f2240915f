//! Dispatch-rule list scheduling and the competitive selection among rules.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{cycle_time, Instance, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    /// Smallest `p / w` among the jobs' next operations.
    Wspt,
    /// Largest `p * w`.
    Wlpt,
    /// Uniformly random eligible job.
    Random,
}

impl RuleKind {
    pub const ALL: [RuleKind; 3] = [RuleKind::Wspt, RuleKind::Wlpt, RuleKind::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::Wspt => "wspt",
            RuleKind::Wlpt => "wlpt",
            RuleKind::Random => "random",
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wspt" => Ok(RuleKind::Wspt),
            "wlpt" => Ok(RuleKind::Wlpt),
            "random" => Ok(RuleKind::Random),
            other => Err(format!("unknown dispatch rule {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InitError {
    #[error("job weights must be positive and finite, got {0}")]
    BadWeight(f64),
    #[error("{found} job weights given for {expected} jobs")]
    WeightCount { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchRule {
    kind: RuleKind,
    weights: Option<Vec<f64>>,
}

impl DispatchRule {
    /// Unit weights, which makes WSPT/WLPT plain SPT/LPT.
    pub fn new(kind: RuleKind) -> Self {
        Self { kind, weights: None }
    }

    pub fn weighted(kind: RuleKind, weights: Vec<f64>) -> Result<Self, InitError> {
        if let Some(&w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(InitError::BadWeight(w));
        }
        Ok(Self { kind, weights: Some(weights) })
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    fn weight(&self, job: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[job])
    }
}

/// Builds a schedule by repeatedly dispatching one job's next route operation
/// at `max(job clock, machine clock)`.
pub fn list_schedule(inst: &Instance, rule: &DispatchRule, seed: u64) -> Result<Schedule, InitError> {
    if let Some(w) = &rule.weights {
        if w.len() != inst.job_count() {
            return Err(InitError::WeightCount { expected: inst.job_count(), found: w.len() });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next: Vec<usize> = (0..inst.job_count()).map(|j| inst.job_range(j).start).collect();
    let mut job_clock = vec![0.0f64; inst.job_count()];
    let mut machine_clock = vec![0.0f64; inst.machine_count()];
    let mut starts = vec![0.0; inst.op_count()];
    let mut eligible = Vec::with_capacity(inst.job_count());

    for _ in 0..inst.op_count() {
        eligible.clear();
        eligible.extend((0..inst.job_count()).filter(|&j| next[j] < inst.job_range(j).end));
        let job = match rule.kind {
            RuleKind::Random => eligible[rng.random_range(0..eligible.len())],
            RuleKind::Wspt => pick(&eligible, |j| inst.duration(next[j]) / rule.weight(j), |a, b| a < b),
            RuleKind::Wlpt => pick(&eligible, |j| inst.duration(next[j]) * rule.weight(j), |a, b| a > b),
        };
        let op = next[job];
        let machine = inst.op(op).machine;
        let start = job_clock[job].max(machine_clock[machine]);
        let end = start + inst.duration(op);
        starts[op] = start;
        job_clock[job] = end;
        machine_clock[machine] = end;
        next[job] += 1;
    }
    Ok(Schedule::from_raw(starts))
}

/// First job whose key strictly beats all earlier ones.
fn pick(jobs: &[usize], key: impl Fn(usize) -> f64, better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = jobs[0];
    let mut best_key = key(best);
    for &j in &jobs[1..] {
        let k = key(j);
        if better(k, best_key) {
            best = j;
            best_key = k;
        }
    }
    best
}

/// Seed for the random rule inside the competitive phase.
fn random_rule_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Runs every rule once and keeps the shortest cycle time; earlier rules in
/// [`RuleKind::ALL`] win ties.
pub fn cdrp(inst: &Instance, seed: u64) -> Schedule {
    cdrp_with_rule(inst, seed).1
}

pub fn cdrp_with_rule(inst: &Instance, seed: u64) -> (RuleKind, Schedule) {
    let mut best: Option<(RuleKind, f64, Schedule)> = None;
    for kind in RuleKind::ALL {
        let s =
            list_schedule(inst, &DispatchRule::new(kind), random_rule_seed(seed)).expect("unit weights always match");
        let tau = cycle_time(inst, &s);
        if best.as_ref().is_none_or(|(_, t, _)| tau < *t) {
            best = Some((kind, tau, s));
        }
    }
    let (kind, _, s) = best.expect("three candidates");
    (kind, s)
}
