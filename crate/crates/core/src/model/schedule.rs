use thiserror::Error;

use super::instance::{Instance, OpId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("schedule has {found} start times, instance has {expected} operations")]
    Length { expected: usize, found: usize },
    #[error("start time of operation {op} is {value}; starts must be finite and non-negative")]
    BadStart { op: OpId, value: f64 },
    #[error("job index {job} out of range ({jobs} jobs)")]
    JobOutOfRange { job: usize, jobs: usize },
}

/// Occurrence-0 start times, one per operation, in the instance's flat order.
///
/// Later occurrences are `start + k * tau` and are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    starts: Vec<f64>,
}

impl Schedule {
    pub fn new(inst: &Instance, starts: Vec<f64>) -> Result<Self, ScheduleError> {
        if starts.len() != inst.op_count() {
            return Err(ScheduleError::Length { expected: inst.op_count(), found: starts.len() });
        }
        if let Some(i) = starts.iter().position(|s| !s.is_finite() || *s < 0.0) {
            return Err(ScheduleError::BadStart { op: inst.op_id(i), value: starts[i] });
        }
        Ok(Self { starts })
    }

    pub fn zeros(inst: &Instance) -> Self {
        Self { starts: vec![0.0; inst.op_count()] }
    }

    /// Builds from already-validated starts inside the crate.
    pub(crate) fn from_raw(starts: Vec<f64>) -> Self {
        debug_assert!(starts.iter().all(|s| s.is_finite() && *s >= 0.0));
        Self { starts }
    }

    pub fn starts(&self) -> &[f64] {
        &self.starts
    }

    pub(crate) fn starts_mut(&mut self) -> &mut [f64] {
        &mut self.starts
    }

    pub fn into_starts(self) -> Vec<f64> {
        self.starts
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn start(&self, flat: usize) -> f64 {
        self.starts[flat]
    }

    pub fn start_of(&self, inst: &Instance, id: OpId) -> Option<f64> {
        inst.index(id).map(|i| self.starts[i])
    }

    pub fn is_integral(&self) -> bool {
        self.starts.iter().all(|s| s.fract() == 0.0)
    }
}

/// Start and completion of one job: earliest start and latest finish over its ops.
pub fn job_times(inst: &Instance, s: &Schedule, job: usize) -> Result<(f64, f64), ScheduleError> {
    if job >= inst.job_count() {
        return Err(ScheduleError::JobOutOfRange { job, jobs: inst.job_count() });
    }
    Ok(inst.job_range(job).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
        let st = s.starts[i];
        (lo.min(st), hi.max(st + inst.duration(i)))
    }))
}

/// `(S_min, C_max)` over the whole schedule.
pub fn span(inst: &Instance, s: &Schedule) -> (f64, f64) {
    s.starts
        .iter()
        .enumerate()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (i, &st)| (lo.min(st), hi.max(st + inst.duration(i))))
}

/// Cycle time `C_max - S_min`.
pub fn cycle_time(inst: &Instance, s: &Schedule) -> f64 {
    let (lo, hi) = span(inst, s);
    hi - lo
}
