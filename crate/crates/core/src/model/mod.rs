//! Instances, schedules, constraint enumeration and feasibility checks.

mod constraints;
mod format;
mod instance;
mod schedule;
mod validate;

pub use constraints::{build_constraints, ConstraintSet};
pub use format::{parse_instance, serialize_instance, NotRectangular, ParseError, ParseErrorKind};
pub use instance::{Instance, InstanceError, Job, OpId, Operation};
pub use schedule::{cycle_time, job_times, span, Schedule, ScheduleError};
pub use validate::{is_feasible, validate, FeasibilityReport, Violation};

/// Small three-job, three-machine shop with routes of length 3, 2 and 2.
///
/// Job 0: M0/6, M1/5, M2/3. Job 1: M1/1, M2/2. Job 2: M2/5, M0/3.
pub fn sample_instance() -> Instance {
    Instance::from_routes("sample", 3, &[&[(0, 6), (1, 5), (2, 3)], &[(1, 1), (2, 2)], &[(2, 5), (0, 3)]])
        .expect("sample instance is valid")
}
