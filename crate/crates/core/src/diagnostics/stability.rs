//! Stability estimates between Euler solutions: the Gronwall bound, its
//! forced variant and the a priori energy bound.

use serde::{Deserialize, Serialize};

use super::reference::EulerTrajectory;
use crate::dynamics::ForcingSpec;
use crate::error::{LabError, Result};
use crate::fields::{l2_norm, Grid};
use crate::stats::trapezoid;

/// Relative slack granted to discrete trajectories before a point counts as
/// a violation.
pub const GRONWALL_MARGIN: f64 = 0.1;

/// Samples per unit time used for time norms of a force.
const FORCE_SAMPLES_PER_UNIT: f64 = 1024.0;

/// Both sides of a stability bound at each checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub grad_bound: f64,
    /// `lhs <= (1 + margin) rhs` at every checkpoint.
    pub satisfied: bool,
    pub first_violation: Option<f64>,
    /// `max lhs / rhs` over checkpoints with `rhs > 0`.
    pub worst_ratio: f64,
}

fn compare(times: Vec<f64>, lhs: Vec<f64>, rhs: Vec<f64>, grad_bound: f64) -> BoundCheck {
    let mut first_violation = None;
    let mut worst_ratio = 0.0f64;
    for ((t, l), r) in times.iter().zip(&lhs).zip(&rhs) {
        if *r > 0.0 {
            worst_ratio = worst_ratio.max(l / r);
        }
        if *l > (1.0 + GRONWALL_MARGIN) * r && first_violation.is_none() {
            first_violation = Some(*t);
        }
    }
    BoundCheck {
        times,
        lhs,
        rhs,
        grad_bound,
        satisfied: first_violation.is_none(),
        first_violation,
        worst_ratio,
    }
}

fn gaps(u: &EulerTrajectory, ubar: &EulerTrajectory) -> Result<Vec<f64>> {
    u.grid().ensure_same(ubar.grid(), "stability check")?;
    if u.checkpoint_times != ubar.checkpoint_times {
        return Err(LabError::config("trajectories use different checkpoint times"));
    }
    u.velocities
        .iter()
        .zip(&ubar.velocities)
        .map(|(a, b)| Ok(l2_norm(&a.sub(b)?).powi(2)))
        .collect()
}

/// `|(u - u_bar)(t)|^2 <= exp(2 t G) |u_0 - u_bar_0|^2` with
/// `G = grad_bound`, normally `ubar.grad_bound`.
pub fn gronwall_bound_check(u: &EulerTrajectory, ubar: &EulerTrajectory, grad_bound: f64) -> Result<BoundCheck> {
    let lhs = gaps(u, ubar)?;
    let d0 = lhs[0];
    let times = u.checkpoint_times.clone();
    let rhs = times.iter().map(|t| (2.0 * t * grad_bound).exp() * d0).collect();
    Ok(compare(times, lhs, rhs, grad_bound))
}

/// `|f|_{L^2(0,T;H)}` by the trapezoid rule on a uniform sample grid.
pub fn force_time_norm(f: &ForcingSpec, grid: &Grid, horizon: f64) -> Result<f64> {
    if f.is_zero() || horizon <= 0.0 {
        return Ok(0.0);
    }
    let n = (horizon * FORCE_SAMPLES_PER_UNIT).ceil().max(2.0) as usize;
    let t: Vec<f64> = (0..=n).map(|k| horizon * k as f64 / n as f64).collect();
    let sq = t.iter().map(|s| Ok(f.norm_at(grid, *s)?.powi(2))).collect::<Result<Vec<_>>>()?;
    Ok(trapezoid(&t, &sq).sqrt())
}

/// `|f - g|_{L^2(0,T;H)}`.
pub fn force_time_distance(f: &ForcingSpec, g: &ForcingSpec, grid: &Grid, horizon: f64) -> Result<f64> {
    if horizon <= 0.0 {
        return Ok(0.0);
    }
    let n = (horizon * FORCE_SAMPLES_PER_UNIT).ceil().max(2.0) as usize;
    let t: Vec<f64> = (0..=n).map(|k| horizon * k as f64 / n as f64).collect();
    let sq = t
        .iter()
        .map(|s| Ok(f.distance_at(g, grid, *s)?.powi(2)))
        .collect::<Result<Vec<_>>>()?;
    Ok(trapezoid(&t, &sq).sqrt())
}

/// The forced bound
///
/// ```text
/// |(u - u_bar)(t)|^2 <= exp(2 t G) ( |u_0 - u_bar_0|^2
///     + 2 sqrt(T) |f - f_bar| ( sqrt(2|u_0|^2 + 4T|f|^2) + sqrt(2|u_bar_0|^2 + 4T|f_bar|^2) ) )
/// ```
///
/// with force norms in `L^2(0,T;H)`.
pub fn forced_gronwall_bound_check(
    u: &EulerTrajectory,
    ubar: &EulerTrajectory,
    f: &ForcingSpec,
    fbar: &ForcingSpec,
    grad_bound: f64,
) -> Result<BoundCheck> {
    let lhs = gaps(u, ubar)?;
    let grid = *u.grid();
    let horizon = u.horizon();
    let df = force_time_distance(f, fbar, &grid, horizon)?;
    let nf = force_time_norm(f, &grid, horizon)?;
    let nfbar = force_time_norm(fbar, &grid, horizon)?;
    let e0 = l2_norm(u.initial()).powi(2);
    let ebar0 = l2_norm(ubar.initial()).powi(2);
    let force_term = 2.0
        * horizon.sqrt()
        * df
        * ((2.0 * e0 + 4.0 * horizon * nf * nf).sqrt() + (2.0 * ebar0 + 4.0 * horizon * nfbar * nfbar).sqrt());
    let base = lhs[0] + force_term;
    let times = u.checkpoint_times.clone();
    let rhs = times.iter().map(|t| (2.0 * t * grad_bound).exp() * base).collect();
    Ok(compare(times, lhs, rhs, grad_bound))
}

/// `sup_t |u(t)|^2` against `2|u_0|^2 + 4T|f|^2_{L^2(0,T;H)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub sup_energy: f64,
    pub bound: f64,
    pub satisfied: bool,
    pub margin: f64,
}

pub fn energy_estimate_check(traj: &EulerTrajectory, f: &ForcingSpec) -> Result<EnergyEstimate> {
    let horizon = traj.horizon();
    let nf = force_time_norm(f, traj.grid(), horizon)?;
    let sup_energy = traj.sup_energy();
    let bound = 2.0 * traj.energy[0] + 4.0 * horizon * nf * nf;
    Ok(EnergyEstimate {
        sup_energy,
        bound,
        satisfied: sup_energy <= bound,
        margin: bound - sup_energy,
    })
}
