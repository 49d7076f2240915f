use super::constraints::ConstraintSet;
use super::instance::{Instance, OpId};
use super::schedule::{span, Schedule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub first: OpId,
    pub second: OpId,
    /// Route deficit for conjunctive pairs, interval overlap for disjunctive.
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub conjunctive_violations: Vec<Violation>,
    pub disjunctive_violations: Vec<Violation>,
    pub cross_cycle_ok: bool,
}

/// Overlap of `[a, a + pa)` and `[b, b + pb)`; positive iff they intersect.
fn overlap(a: f64, pa: f64, b: f64, pb: f64) -> f64 {
    (a + pa).min(b + pb) - a.max(b)
}

/// Occurrence pairs are checked with a small relative slack, since
/// `S + tau` is recomputed from rounded values.
fn cross_cycle_ok(inst: &Instance, cs: &ConstraintSet, s: &Schedule) -> bool {
    let (lo, hi) = span(inst, s);
    let tau = hi - lo;
    let eps = 1e-9 * (1.0 + tau.abs());
    if tau < f64::from(inst.max_duration()) - eps {
        return false;
    }
    // occurrence 0 of `a` against occurrence 1 of `b`, both directions, and
    // consecutive occurrences of each op with itself
    let clear = |a: usize, b: usize| {
        let (sa, pa) = (s.start(a), inst.duration(a));
        let (sb, pb) = (s.start(b) + tau, inst.duration(b));
        overlap(sa, pa, sb, pb) <= eps
    };
    (0..inst.op_count()).all(|i| clear(i, i)) && cs.disjunctive().iter().all(|&(a, b)| clear(a, b) && clear(b, a))
}

pub fn validate(inst: &Instance, cs: &ConstraintSet, s: &Schedule) -> FeasibilityReport {
    let conjunctive_violations: Vec<Violation> = cs
        .conjunctive()
        .iter()
        .filter_map(|&(a, b)| {
            let r = (s.start(a) + inst.duration(a)) - s.start(b);
            (r > 0.0).then(|| Violation { first: inst.op_id(a), second: inst.op_id(b), amount: r })
        })
        .collect();

    let disjunctive_violations: Vec<Violation> = cs
        .disjunctive()
        .iter()
        .filter_map(|&(a, b)| {
            let ov = overlap(s.start(a), inst.duration(a), s.start(b), inst.duration(b));
            (ov > 0.0).then(|| {
                let (first, second) = if s.start(a) <= s.start(b) { (a, b) } else { (b, a) };
                Violation { first: inst.op_id(first), second: inst.op_id(second), amount: ov }
            })
        })
        .collect();

    let cross_cycle_ok = cross_cycle_ok(inst, cs, s);
    FeasibilityReport {
        feasible: conjunctive_violations.is_empty() && disjunctive_violations.is_empty() && cross_cycle_ok,
        conjunctive_violations,
        disjunctive_violations,
        cross_cycle_ok,
    }
}

pub fn is_feasible(inst: &Instance, cs: &ConstraintSet, s: &Schedule) -> bool {
    validate(inst, cs, s).feasible
}
