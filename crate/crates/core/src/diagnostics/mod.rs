//! Functionals of Navier-Stokes ensembles and Euler trajectories: energy
//! balances, the weak formulation, the condition functionals of the
//! inviscid limit and stability bounds.
//!
//! Expectations are ensemble means computed with [`crate::stats::det_sum`],
//! so every functional is invariant under relabeling of the paths. Suprema
//! over time are maxima over stored checkpoints; time integrals use the
//! trapezoid rule on the solver grid and the Itô integral is left-point.

pub mod conditions;
pub mod energy;
pub mod record;
pub mod reference;
pub mod stability;
pub mod weak;

pub use conditions::{convergence_metrics, kato_functionals, ConditionReport, ConvergenceMetrics, KatoFunctionals};
pub use energy::{
    energy_equality_residual, ito_consistency, ito_integral, ito_residual, uniform_energy_check,
    ItoConsistency, ResidualSeries, UniformEnergyCheck, BDG_CONSTANT,
};
pub use record::{record_trajectory, Checkpoint, PathMeta, ProbeSeries, RecordOptions, TestField, TrajectoryRecord};
pub use reference::{run_euler, EulerTrajectory};
pub use stability::{
    energy_estimate_check, force_time_distance, force_time_norm, forced_gronwall_bound_check,
    gronwall_bound_check, BoundCheck, EnergyEstimate, GRONWALL_MARGIN,
};
pub use weak::{test_dictionary, weak_formulation_residual, TimeProfile, WeakResidual};
