//! Seeded Monte Carlo experiments.
//!
//! An [`ExperimentConfig`] fixes the grid, time grid, viscosities, noise,
//! initial data and seeds. [`Experiment`] builds the shared objects once;
//! [`run_sweep`] runs every (viscosity, path) pair in parallel and reduces the
//! records in a fixed order, so the resulting [`SweepReport`] is a pure
//! function of the configuration.
//!
//! Brownian increments depend only on the master seed and the path index and
//! are drawn on the finest step the path runner may fall back to, then summed
//! to the step actually used. The same path index therefore sees the same
//! noise at every viscosity and after any number of step halvings.

pub mod audit;
pub mod config;
pub mod euler;
pub mod run;
pub mod schedule;

pub use audit::{energy_audit, AuditLevel, AuditReport};
pub use euler::{euler_energy, stability_twins, EulerReport, StabilityReport};
pub use config::{ExperimentConfig, IcKindName, Mode};
pub use run::{
    path_seed, run_path, run_sweep, run_sweep_with, Experiment, MonotonicityFlags, PathFailure, PathKey,
    SolverSummary, SweepReport, ViscosityEntry, MAX_HALVINGS,
};
pub use schedule::{theorem6_schedule, ScheduleKind, Theorem6Schedule};
