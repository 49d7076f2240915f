//! Post-processing of network output: right-shift repair passes, then a
//! longest-path left compaction that keeps every machine's operation order.

use std::cmp::Ordering;

use thiserror::Error;

use crate::model::{validate, ConstraintSet, Instance, Schedule};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepairError {
    #[error("repair passes did not reach a fixed point within {rounds} rounds")]
    NonConvergence { rounds: usize },
    #[error("schedule is infeasible ({conjunctive} route and {disjunctive} machine violations); repair it first")]
    Infeasible { conjunctive: usize, disjunctive: usize },
    #[error("machine sequences together with job routes contain a cycle")]
    Cyclic,
    #[error("machine {machine} sequence is not a permutation of its operations")]
    InvalidSequence { machine: usize },
    #[error("compaction produced a fractional start time {0}")]
    Fractional(f64),
}

/// Machine sequences: for each machine, its flat op indices in processing order.
pub type Sequences = Vec<Vec<usize>>;

fn by_start(starts: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| starts[a].total_cmp(&starts[b]).then(a.cmp(&b))
}

/// Orders `ops` by current start, ties by flat (job, op) index.
fn sort_by_start(ops: &mut [usize], starts: &[f64]) {
    ops.sort_unstable_by(by_start(starts));
}

/// Machine order induced by a schedule.
pub fn sequences_of(cs: &ConstraintSet, s: &Schedule) -> Sequences {
    cs.machine_ops()
        .iter()
        .map(|ops| {
            let mut v = ops.clone();
            sort_by_start(&mut v, s.starts());
            v
        })
        .collect()
}

/// One disjunctive pass; returns whether anything moved.
fn disjunctive_pass(inst: &Instance, cs: &ConstraintSet, starts: &mut [f64], order: &mut Vec<usize>) -> bool {
    let mut moved = false;
    for ops in cs.machine_ops() {
        order.clear();
        order.extend_from_slice(ops);
        sort_by_start(order, starts);
        for k in 1..order.len() {
            let (prev, cur) = (order[k - 1], order[k]);
            let end = starts[prev] + inst.duration(prev);
            let gap = starts[cur] - end;
            if gap < 0.0 {
                for &later in &order[k..] {
                    starts[later] -= gap;
                }
                // keep the previous op's end exact for integer-valued inputs
                starts[cur] = starts[cur].max(end);
                moved = true;
            }
        }
    }
    moved
}

fn conjunctive_pass(inst: &Instance, starts: &mut [f64]) -> bool {
    let mut moved = false;
    for job in 0..inst.job_count() {
        let r = inst.job_range(job);
        for i in r.start + 1..r.end {
            let end = starts[i - 1] + inst.duration(i - 1);
            let gap = starts[i] - end;
            if gap < 0.0 {
                for later in &mut starts[i..r.end] {
                    *later -= gap;
                }
                starts[i] = starts[i].max(end);
                moved = true;
            }
        }
    }
    moved
}

/// Right-shifts later operations on each machine until no two overlap.
pub fn adhere_disjunctive(inst: &Instance, cs: &ConstraintSet, s: &Schedule) -> Schedule {
    let mut out = s.clone();
    disjunctive_pass(inst, cs, out.starts_mut(), &mut Vec::new());
    out
}

/// Right-shifts later operations of each job until its route is respected.
pub fn adhere_conjunctive(inst: &Instance, s: &Schedule) -> Schedule {
    let mut out = s.clone();
    conjunctive_pass(inst, out.starts_mut());
    out
}

fn round_limit(inst: &Instance) -> usize {
    10 * inst.op_count().max(1)
}

fn make_feasible_in_place(
    inst: &Instance,
    cs: &ConstraintSet,
    starts: &mut [f64],
    order: &mut Vec<usize>,
) -> Result<(), RepairError> {
    let rounds = round_limit(inst);
    for _ in 0..rounds {
        // a full machine pass leaves every machine clean, so a quiet route
        // pass means both constraint families hold
        disjunctive_pass(inst, cs, starts, order);
        if !conjunctive_pass(inst, starts) {
            return Ok(());
        }
    }
    Err(RepairError::NonConvergence { rounds })
}

/// Alternates both adhere passes until neither moves anything.
pub fn make_feasible(inst: &Instance, cs: &ConstraintSet, s: &Schedule) -> Result<Schedule, RepairError> {
    let mut out = s.clone();
    make_feasible_in_place(inst, cs, out.starts_mut(), &mut Vec::new())?;
    Ok(out)
}

/// Earliest starts for fixed machine sequences (longest path from the sources).
pub fn compact_sequences(inst: &Instance, seqs: &[Vec<usize>]) -> Result<Schedule, RepairError> {
    let mut scratch = Scratch::new(inst);
    let mut out = vec![0.0; inst.op_count()];
    scratch.longest_path(inst, seqs, &mut out)?;
    Ok(Schedule::from_raw(out))
}

/// Machine-order-preserving left compaction of a feasible schedule.
pub fn compact(inst: &Instance, cs: &ConstraintSet, s: &Schedule) -> Result<Schedule, RepairError> {
    let rep = validate(inst, cs, s);
    if !rep.feasible {
        return Err(RepairError::Infeasible {
            conjunctive: rep.conjunctive_violations.len(),
            disjunctive: rep.disjunctive_violations.len(),
        });
    }
    compact_sequences(inst, &sequences_of(cs, s))
}

/// Compaction with integer starts; durations are integral, so the longest
/// path sums are exact.
pub fn integerize(inst: &Instance, cs: &ConstraintSet, s: &Schedule) -> Result<Schedule, RepairError> {
    let out = compact(inst, cs, s)?;
    if let Some(&bad) = out.starts().iter().find(|v| v.fract() != 0.0) {
        return Err(RepairError::Fractional(bad));
    }
    Ok(out)
}

/// Reusable buffers for the solver's per-iteration repair and compaction.
#[derive(Debug, Clone)]
pub(crate) struct Scratch {
    order: Vec<usize>,
    seqs: Sequences,
    machine_pred: Vec<Option<usize>>,
    machine_succ: Vec<Option<usize>>,
    indegree: Vec<u8>,
    visited: Vec<bool>,
    queue: Vec<usize>,
}

impl Scratch {
    pub(crate) fn new(inst: &Instance) -> Self {
        let n = inst.op_count();
        Self {
            order: Vec::new(),
            seqs: vec![Vec::new(); inst.machine_count()],
            machine_pred: vec![None; n],
            machine_succ: vec![None; n],
            indegree: vec![0; n],
            visited: vec![false; n],
            queue: Vec::with_capacity(n),
        }
    }

    /// Repair `starts` in place, then overwrite them with the compacted schedule.
    pub(crate) fn repair_and_compact(
        &mut self,
        inst: &Instance,
        cs: &ConstraintSet,
        starts: &mut [f64],
    ) -> Result<(), RepairError> {
        make_feasible_in_place(inst, cs, starts, &mut self.order)?;
        let mut seqs = std::mem::take(&mut self.seqs);
        for (seq, ops) in seqs.iter_mut().zip(cs.machine_ops()) {
            seq.clear();
            seq.extend_from_slice(ops);
            sort_by_start(seq, starts);
        }
        let r = self.longest_path(inst, &seqs, starts);
        self.seqs = seqs;
        r
    }

    fn longest_path(&mut self, inst: &Instance, seqs: &[Vec<usize>], out: &mut [f64]) -> Result<(), RepairError> {
        let n = inst.op_count();
        self.machine_pred.iter_mut().for_each(|p| *p = None);
        self.machine_succ.iter_mut().for_each(|p| *p = None);
        if seqs.len() != inst.machine_count() {
            return Err(RepairError::InvalidSequence { machine: seqs.len().min(inst.machine_count()) });
        }
        self.visited.iter_mut().for_each(|v| *v = false);
        for (m, seq) in seqs.iter().enumerate() {
            for &op in seq {
                if op >= n || inst.op(op).machine != m || self.visited[op] {
                    return Err(RepairError::InvalidSequence { machine: m });
                }
                self.visited[op] = true;
            }
            for w in seq.windows(2) {
                self.machine_pred[w[1]] = Some(w[0]);
                self.machine_succ[w[0]] = Some(w[1]);
            }
        }
        if let Some(missing) = self.visited.iter().position(|v| !v) {
            return Err(RepairError::InvalidSequence { machine: inst.op(missing).machine });
        }

        for job in 0..inst.job_count() {
            let r = inst.job_range(job);
            for i in r.clone() {
                let job_pred = u8::from(i > r.start);
                let mach_pred = u8::from(self.machine_pred[i].is_some());
                self.indegree[i] = job_pred + mach_pred;
            }
        }

        self.queue.clear();
        self.queue.extend((0..n).filter(|&i| self.indegree[i] == 0));
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            let end = out[u] + inst.duration(u);
            let job_succ = (u + 1 < n && inst.op_id(u + 1).job == inst.op_id(u).job).then_some(u + 1);
            for v in [job_succ, self.machine_succ[u]].into_iter().flatten() {
                if out[v] < end {
                    out[v] = end;
                }
                self.indegree[v] -= 1;
                if self.indegree[v] == 0 {
                    self.queue.push(v);
                }
            }
        }
        if self.queue.len() != n {
            return Err(RepairError::Cyclic);
        }
        Ok(())
    }
}
