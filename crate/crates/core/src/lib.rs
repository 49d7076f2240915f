//! Cyclic job shop scheduling by energy descent.
//!
//! A 1-periodic schedule is stored as the start times of one occurrence of
//! every operation; the cycle time is `C_max - S_min`. The solver minimizes
//! a penalty energy over those start times with gradient dynamics, escapes
//! plateaus by random perturbation, and repairs plus compacts the state into
//! feasible integer schedules along the way.

pub mod bench;
pub mod cli;
pub mod energy;
pub mod init;
pub mod model;
pub mod par;
pub mod repair;
pub mod solver;

pub use energy::{DualState, EnergyBreakdown, EnergyError};
pub use init::{cdrp, list_schedule, DispatchRule, RuleKind};
pub use model::{
    build_constraints, cycle_time, parse_instance, validate, ConstraintSet, FeasibilityReport, Instance, OpId, Schedule,
};
pub use repair::RepairError;
pub use solver::{solve, InitRule, PerturbMode, Restart, SolveError, SolveResult, SolverConfig, Variant};
