use std::fmt;

use thiserror::Error;

/// Position of an operation inside an instance: job index and index along
/// that job's route, both 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpId {
    pub job: usize,
    pub op: usize,
}

impl OpId {
    pub fn new(job: usize, op: usize) -> Self {
        Self { job, op }
    }
}

impl fmt::Display for OpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.job, self.op)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Operation {
    pub machine: usize,
    pub duration: u32,
}

impl Operation {
    pub fn new(machine: usize, duration: u32) -> Self {
        Self { machine, duration }
    }
}

/// A job is its fixed route through the machines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    ops: Vec<Operation>,
}

impl Job {
    pub fn new(ops: Vec<Operation>) -> Self {
        Self { ops }
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("instance needs at least one machine")]
    NoMachines,
    #[error("instance needs at least one job")]
    NoJobs,
    #[error("job {job} has no operations")]
    EmptyJob { job: usize },
    #[error("operation {op} uses machine {machine}, but only {machine_count} machines exist")]
    MachineOutOfRange { op: OpId, machine: usize, machine_count: usize },
    #[error("operation {op} has zero processing time")]
    ZeroDuration { op: OpId },
}

/// A cyclic job shop: `machine_count` machines and jobs with fixed routes.
///
/// Operations are also addressed by a flat index in (job, op) lexicographic
/// order; schedules, residual vectors and gradients all use that layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    name: String,
    machine_count: usize,
    jobs: Vec<Job>,
    offsets: Vec<usize>,
    ops: Vec<Operation>,
    owners: Vec<OpId>,
}

impl Instance {
    pub fn new(name: impl Into<String>, machine_count: usize, jobs: Vec<Job>) -> Result<Self, InstanceError> {
        if machine_count == 0 {
            return Err(InstanceError::NoMachines);
        }
        if jobs.is_empty() {
            return Err(InstanceError::NoJobs);
        }
        let mut offsets = Vec::with_capacity(jobs.len() + 1);
        let mut ops = Vec::new();
        let mut owners = Vec::new();
        for (j, job) in jobs.iter().enumerate() {
            if job.is_empty() {
                return Err(InstanceError::EmptyJob { job: j });
            }
            offsets.push(ops.len());
            for (k, op) in job.ops().iter().enumerate() {
                let id = OpId::new(j, k);
                if op.machine >= machine_count {
                    return Err(InstanceError::MachineOutOfRange { op: id, machine: op.machine, machine_count });
                }
                if op.duration == 0 {
                    return Err(InstanceError::ZeroDuration { op: id });
                }
                ops.push(*op);
                owners.push(id);
            }
        }
        offsets.push(ops.len());
        Ok(Self { name: name.into(), machine_count, jobs, offsets, ops, owners })
    }

    /// Convenience constructor from `(machine, duration)` routes.
    pub fn from_routes(
        name: impl Into<String>,
        machine_count: usize,
        routes: &[&[(usize, u32)]],
    ) -> Result<Self, InstanceError> {
        let jobs = routes.iter().map(|r| Job::new(r.iter().map(|&(m, p)| Operation::new(m, p)).collect())).collect();
        Self::new(name, machine_count, jobs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn machine_count(&self) -> usize {
        self.machine_count
    }

    pub fn job_count(&self) -> usize {
        self.jobs.len()
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    /// Total number of operations.
    pub fn op_count(&self) -> usize {
        self.ops.len()
    }

    /// Flat operations in (job, op) order.
    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn op(&self, flat: usize) -> Operation {
        self.ops[flat]
    }

    pub fn duration(&self, flat: usize) -> f64 {
        f64::from(self.ops[flat].duration)
    }

    pub fn op_id(&self, flat: usize) -> OpId {
        self.owners[flat]
    }

    pub fn index(&self, id: OpId) -> Option<usize> {
        let job = self.jobs.get(id.job)?;
        (id.op < job.len()).then(|| self.offsets[id.job] + id.op)
    }

    /// Flat index range of one job's operations.
    pub fn job_range(&self, job: usize) -> std::ops::Range<usize> {
        self.offsets[job]..self.offsets[job + 1]
    }

    pub fn max_duration(&self) -> u32 {
        self.ops.iter().map(|o| o.duration).max().unwrap_or(0)
    }

    pub fn mean_duration(&self) -> f64 {
        let total: f64 = self.ops.iter().map(|o| f64::from(o.duration)).sum();
        total / self.ops.len() as f64
    }

    pub fn total_duration(&self) -> u64 {
        self.ops.iter().map(|o| u64::from(o.duration)).sum()
    }

    /// Every job has exactly one operation per machine slot, as the standard
    /// file format requires.
    pub fn is_rectangular(&self) -> bool {
        self.jobs.iter().all(|j| j.len() == self.machine_count)
    }
}
