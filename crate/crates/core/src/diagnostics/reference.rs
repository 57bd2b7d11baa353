//! Euler trajectories sampled for comparison with Navier-Stokes paths.

use serde::{Deserialize, Serialize};

use crate::dynamics::{EulerState, EulerStepper, ForcingSpec, TimeGrid};
use crate::error::Result;
use crate::fields::{grad_linf_norm, Grid, VelocityField};

/// Euler solution on a time grid: energy and gradient bound at every step,
/// velocity at checkpoints.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EulerTrajectory {
    grid: Grid,
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub checkpoint_times: Vec<f64>,
    pub checkpoint_indices: Vec<usize>,
    pub velocities: Vec<VelocityField>,
    /// `max_t |grad u(t)|_{L^inf}` over every step.
    pub grad_bound: f64,
}

impl EulerTrajectory {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn initial(&self) -> &VelocityField {
        &self.velocities[0]
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("nonempty trajectory")
    }

    /// `sup_t |u(t)|^2` over every step.
    pub fn sup_energy(&self) -> f64 {
        self.energy.iter().fold(0.0, |m, e| m.max(*e))
    }

    /// Largest relative energy change `| |u(t)|^2 - |u(0)|^2 | / |u(0)|^2`.
    pub fn relative_energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        if e0 == 0.0 {
            return 0.0;
        }
        self.energy.iter().fold(0.0, |m, e| m.max((e - e0).abs() / e0))
    }
}

/// Integrates the Euler equations from `initial` on `time`.
pub fn run_euler(
    stepper: &EulerStepper,
    initial: &EulerState,
    time: &TimeGrid,
    checkpoints: usize,
    forcing: &ForcingSpec,
) -> Result<EulerTrajectory> {
    let checkpoint_indices = time.checkpoint_indices(checkpoints);
    let times = time.times();
    let mut energy = Vec::with_capacity(times.len());
    let mut velocities = Vec::with_capacity(checkpoint_indices.len());
    let mut next = 0;
    let mut state = initial.clone();
    state.time = 0.0;
    let mut grad_bound = 0.0f64;
    let mut observe = |j: usize, s: &EulerState| {
        energy.push(s.energy());
        grad_bound = grad_bound.max(grad_linf_norm(&s.velocity));
        if checkpoint_indices.get(next) == Some(&j) {
            velocities.push(s.velocity.clone());
            next += 1;
        }
    };
    observe(0, &state);
    for (j, &dt) in time.steps().iter().enumerate() {
        state = stepper.step(&state, dt, forcing)?;
        state.time = times[j + 1];
        observe(j + 1, &state);
    }
    Ok(EulerTrajectory {
        grid: *stepper.grid(),
        checkpoint_times: checkpoint_indices.iter().map(|&j| times[j]).collect(),
        times,
        energy,
        checkpoint_indices,
        velocities,
        grad_bound,
    })
}
