use super::instance::Instance;

/// Every constraint of a 1-periodic schedule, as pairs of flat op indices.
///
/// Residual vectors use this layout: all conjunctive pairs in (job, op)
/// order, then all disjunctive pairs in (machine, pair) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    conjunctive: Vec<(usize, usize)>,
    disjunctive: Vec<(usize, usize)>,
    machine_ops: Vec<Vec<usize>>,
}

impl ConstraintSet {
    pub fn build(inst: &Instance) -> Self {
        let mut conjunctive = Vec::with_capacity(inst.op_count() - inst.job_count());
        for job in 0..inst.job_count() {
            let r = inst.job_range(job);
            conjunctive.extend((r.start..r.end - 1).map(|i| (i, i + 1)));
        }

        let mut machine_ops = vec![Vec::new(); inst.machine_count()];
        for (i, op) in inst.ops().iter().enumerate() {
            machine_ops[op.machine].push(i);
        }

        let mut disjunctive = Vec::new();
        for ops in &machine_ops {
            for (k, &a) in ops.iter().enumerate() {
                disjunctive.extend(ops[k + 1..].iter().map(|&b| (a, b)));
            }
        }

        Self { conjunctive, disjunctive, machine_ops }
    }

    /// Route pairs `(op, next op)`.
    pub fn conjunctive(&self) -> &[(usize, usize)] {
        &self.conjunctive
    }

    /// Same-machine pairs `(a, b)` with `a < b` in flat order.
    pub fn disjunctive(&self) -> &[(usize, usize)] {
        &self.disjunctive
    }

    /// Flat indices of the operations assigned to each machine, ascending.
    pub fn machine_ops(&self) -> &[Vec<usize>] {
        &self.machine_ops
    }

    pub fn gamma(&self) -> usize {
        self.conjunctive.len()
    }

    pub fn omega(&self) -> usize {
        self.disjunctive.len()
    }

    pub fn xi(&self) -> usize {
        self.gamma() + self.omega()
    }
}

pub fn build_constraints(inst: &Instance) -> ConstraintSet {
    ConstraintSet::build(inst)
}
