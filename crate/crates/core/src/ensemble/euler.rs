//! Euler-only experiments: energy conservation of the reference run and
//! stability of twin runs with nearby data and forces.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::Experiment;
use crate::diagnostics::{
    energy_estimate_check, forced_gronwall_bound_check, gronwall_bound_check, run_euler, BoundCheck,
    EnergyEstimate,
};
use crate::dynamics::perturbation_direction;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerReport {
    pub config_hash: String,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub horizon: f64,
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub relative_energy_drift: f64,
    pub grad_bound: f64,
    pub energy_estimate: EnergyEstimate,
}

/// The reference run of `config` on the base step.
pub fn euler_energy(config: &ExperimentConfig) -> Result<EulerReport> {
    let exp = Experiment::new(config)?;
    let traj = exp.reference(0)?;
    Ok(EulerReport {
        config_hash: config.hash(),
        nx: config.grid.nx,
        ny: config.grid.ny,
        dt: config.time.dt,
        horizon: config.time.horizon,
        times: traj.times.clone(),
        energy: traj.energy.clone(),
        relative_energy_drift: traj.relative_energy_drift(),
        grad_bound: traj.grad_bound,
        energy_estimate: energy_estimate_check(traj, exp.reference_force())?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub config_hash: String,
    /// `|u_0 - u_bar_0|`.
    pub separation: f64,
    pub unforced: BoundCheck,
    /// Present when the configuration has a body force: the perturbed twin
    /// also feels `f^nu - f`.
    pub forced: Option<BoundCheck>,
}

/// Twin runs from `u_bar_0` and `u_bar_0 + separation d` for a fixed unit
/// direction `d`, checked against the Gronwall bound with the gradient bound
/// of the reference run. The forced pair uses the viscous force at
/// `physics.nu` for the perturbed twin.
pub fn stability_twins(config: &ExperimentConfig, separation: f64) -> Result<StabilityReport> {
    let exp = Experiment::new(config)?;
    let stepper = exp.euler_stepper();
    let time = exp.time_grid(0)?;
    let cps = exp.checkpoints();
    let base = exp.reference_state();
    let psi = base.stream.axpy(separation, &perturbation_direction(*exp.grid())?)?;
    let twin = stepper.from_stream(&psi, 0.0)?;
    let zero = crate::dynamics::ForcingSpec::zero();
    let ubar = run_euler(stepper, base, &time, cps, &zero)?;
    let u = run_euler(stepper, &twin, &time, cps, &zero)?;
    let unforced = gronwall_bound_check(&u, &ubar, ubar.grad_bound)?;
    let forced = if exp.reference_force().is_zero() && exp.force_for(&exp.entry_for(config.physics.nu)).is_zero() {
        None
    } else {
        let fbar = exp.reference_force();
        let f = exp.force_for(&exp.entry_for(config.physics.nu));
        let ubar = exp.reference(0)?;
        let u = run_euler(stepper, &twin, &time, cps, &f)?;
        Some(forced_gronwall_bound_check(&u, ubar, &f, fbar, ubar.grad_bound)?)
    };
    Ok(StabilityReport {
        config_hash: config.hash(),
        separation: crate::fields::l2_norm(&twin.velocity.sub(&base.velocity)?),
        unforced,
        forced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_conserves_energy_and_is_stable() {
        let text = "[grid]\nnx = 32\nny = 32\n[time]\nhorizon = 0.2\ndt = 0.005\ncheckpoints = 8\n\
                    [physics]\nnu = 0.01\nmode = \"deterministic\"\n\
                    [forcing]\namplitude = 0.5\nfrequency = 1.0\nperturbation = 0.1\n";
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        let e = euler_energy(&cfg).unwrap();
        assert!(e.energy_estimate.satisfied);
        let s = stability_twins(&cfg, 1e-3).unwrap();
        assert!((s.separation - 1e-3).abs() < 1e-12);
        assert!(s.unforced.satisfied, "{:?}", s.unforced.worst_ratio);
        let forced = s.forced.unwrap();
        assert!(forced.satisfied, "{:?}", forced.worst_ratio);
    }
}
