//! Continuous-time dynamical solver for 3-SAT.
//!
//! Each clause is relaxed to a constraint function over voltages in
//! `[-1, 1]`, and two per-clause memory variables deform the landscape so
//! that the only attractors of the flow are satisfying assignments. The
//! flow is integrated with adaptive forward Euler until every clause
//! constraint drops below 1/2, at which point `sign(v)` is a model.
//!
//! The crate also contains the planted-instance (CDC) generator used for
//! benchmarking, a WalkSAT baseline, and an ensemble sweep runner with
//! power-law / exponential scaling fits.

pub mod cnf;
pub mod dynamics;
pub mod gen;
pub mod heuristics;
pub mod integrator;
pub mod sweep;
pub mod walksat;

pub use cnf::{Assignment, Clause, CnfError, Formula, Literal};
pub use dynamics::{Derivative, SolverParams, SolverState};
pub use gen::{CdcParams, GenError, PlantedInstance};
pub use heuristics::{CompetitionConfig, CompetitionSchedule};
pub use integrator::{AdaptiveConfig, InitPolicy, RunConfig, RunRecord};
pub use sweep::{Fit, SolverKind, SweepConfig, SweepResult};
pub use walksat::WalkSatParams;
