//! Energy balance residuals: the energy equality in expectation, the
//! pathwise Itô formula and the uniform-in-time energy bound.

use serde::{Deserialize, Serialize};

use super::record::TrajectoryRecord;
use crate::dynamics::NoiseModel;
use crate::error::{LabError, Result};
use crate::stats::{cumulative_trapezoid, det_mean, trapezoid, Estimate};

/// Default constant of the uniform energy bound.
pub const BDG_CONSTANT: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Residual with Monte Carlo bands at every time of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSeries {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    /// Reference input `t nu sum_k |sigma_k|^2`.
    pub drift: Vec<f64>,
}

impl ResidualSeries {
    pub fn max_abs(&self) -> f64 {
        self.mean.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn check_ensemble(ensemble: &[TrajectoryRecord], model: &NoiseModel) -> Result<()> {
    let first = ensemble
        .first()
        .ok_or_else(|| LabError::config("empty ensemble"))?;
    for r in ensemble {
        if r.nu != first.nu || r.times != first.times || r.n_modes != model.n_modes() {
            return Err(LabError::config(
                "ensemble members differ in viscosity, time grid or noise model",
            ));
        }
        if r.nx != model.grid().nx() || r.ny != model.grid().ny() {
            return Err(LabError::config("ensemble grid differs from the noise model grid"));
        }
    }
    Ok(())
}

/// `t nu sum_k |sigma_k|^2` on the record's time grid.
fn drift(record: &TrajectoryRecord, model: &NoiseModel) -> Vec<f64> {
    let rate = record.nu * model.total_intensity();
    record.times.iter().map(|t| t * rate).collect()
}

/// `|u(t)|^2 + 2 nu int_0^t |grad u|^2 - |u_0|^2 - t nu sum |sigma_k|^2`.
fn balance(record: &TrajectoryRecord, drift: &[f64]) -> Vec<f64> {
    let dissipated = cumulative_trapezoid(&record.times, &record.dissipation);
    let e0 = record.energy[0];
    record
        .energy
        .iter()
        .zip(&dissipated)
        .zip(drift)
        .map(|((e, d), q)| e + 2.0 * record.nu * d - e0 - q)
        .collect()
}

fn pointwise(per_path: &[Vec<f64>], times: &[f64], drift: Vec<f64>) -> ResidualSeries {
    let mut mean = Vec::with_capacity(times.len());
    let mut se = Vec::with_capacity(times.len());
    for j in 0..times.len() {
        let column: Vec<f64> = per_path.iter().map(|p| p[j]).collect();
        let e = Estimate::from_samples(&column);
        mean.push(e.mean);
        se.push(e.se);
    }
    ResidualSeries {
        times: times.to_vec(),
        mean,
        se,
        drift,
    }
}

/// Energy equality residual `R(t)` with ensemble means.
pub fn energy_equality_residual(ensemble: &[TrajectoryRecord], model: &NoiseModel) -> Result<ResidualSeries> {
    check_ensemble(ensemble, model)?;
    let q = drift(&ensemble[0], model);
    let per_path: Vec<Vec<f64>> = ensemble.iter().map(|r| balance(r, &q)).collect();
    Ok(pointwise(&per_path, &ensemble[0].times, q))
}

/// Left-point Itô integral `sum_k int_0^t <u, sigma_k> dW^k` at every grid time.
pub fn ito_integral(record: &TrajectoryRecord) -> Result<Vec<f64>> {
    let n = record.n_steps();
    let modes = record.n_modes;
    if record.cross.len() != (n + 1) * modes {
        return Err(LabError::config("record is missing the noise cross terms"));
    }
    if record.noise.n_steps() != n || record.noise.n_modes() != modes {
        return Err(LabError::config("noise path does not match the record"));
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(acc);
    for j in 0..n {
        let dw = record.noise.step(j);
        acc += record.cross_at(j).iter().zip(dw).map(|(c, w)| c * w).sum::<f64>();
        out.push(acc);
    }
    Ok(out)
}

/// Pathwise Itô-formula residual
/// `r(t) = R_path(t) - 2 nu^{1/2} sum_k int_0^t <u, sigma_k> dW^k`.
pub fn ito_residual(record: &TrajectoryRecord, model: &NoiseModel) -> Result<Vec<f64>> {
    if record.n_modes != model.n_modes() {
        return Err(LabError::config("record and noise model differ in mode count"));
    }
    let stochastic = ito_integral(record)?;
    let q = drift(record, model);
    let scale = 2.0 * record.nu.sqrt();
    Ok(balance(record, &q)
        .into_iter()
        .zip(stochastic)
        .map(|(b, s)| b - scale * s)
        .collect())
}

/// Comparison of the mean pathwise residual with the expectation residual
/// at checkpoints. Their difference is the ensemble mean of the Itô
/// integral, whose standard error sets the scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItoConsistency {
    pub times: Vec<f64>,
    pub mean_pathwise: Vec<f64>,
    pub expectation: Vec<f64>,
    pub se: Vec<f64>,
    /// `|difference| / se`, 0 where both vanish.
    pub z: Vec<f64>,
}

impl ItoConsistency {
    pub fn max_z(&self) -> f64 {
        self.z.iter().fold(0.0, |m, v| m.max(*v))
    }

    pub fn within(&self, k: f64) -> bool {
        self.z.iter().all(|z| *z <= k)
    }
}

pub fn ito_consistency(
    ensemble: &[TrajectoryRecord],
    model: &NoiseModel,
    checkpoints: &[usize],
) -> Result<ItoConsistency> {
    let expectation = energy_equality_residual(ensemble, model)?;
    let pathwise = ensemble
        .iter()
        .map(|r| ito_residual(r, model))
        .collect::<Result<Vec<_>>>()?;
    let integrals = ensemble.iter().map(ito_integral).collect::<Result<Vec<_>>>()?;
    let scale = 2.0 * ensemble[0].nu.sqrt();
    let mut out = ItoConsistency {
        times: Vec::new(),
        mean_pathwise: Vec::new(),
        expectation: Vec::new(),
        se: Vec::new(),
        z: Vec::new(),
    };
    for &j in checkpoints {
        let r: Vec<f64> = pathwise.iter().map(|p| p[j]).collect();
        let s: Vec<f64> = integrals.iter().map(|p| scale * p[j]).collect();
        let mean = det_mean(&r);
        let se = Estimate::from_samples(&s).se;
        let diff = (mean - expectation.mean[j]).abs();
        out.times.push(expectation.times[j]);
        out.mean_pathwise.push(mean);
        out.expectation.push(expectation.mean[j]);
        out.se.push(se);
        out.z.push(if diff == 0.0 { 0.0 } else { diff / se });
    }
    Ok(out)
}

/// Both sides of the uniform energy bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformEnergyCheck {
    /// `E sup_t |u(t)|^2`.
    pub lhs: f64,
    /// `E |u_0|^2`.
    pub initial: f64,
    /// `T nu^{1/2} sum_k |sigma_k|^2`.
    pub noise_drift: f64,
    /// `nu^{1/2} sum_k (E int_0^T <u, sigma_k>^2 ds)^{1/2}`.
    pub martingale: f64,
    pub k: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// `rhs - lhs`.
    pub margin: f64,
    /// Smallest constant for which the bound holds; 0 if it holds without
    /// the martingale term, infinite if no constant suffices.
    pub k_min: f64,
}

pub fn uniform_energy_check(ensemble: &[TrajectoryRecord], model: &NoiseModel, k: f64) -> Result<UniformEnergyCheck> {
    check_ensemble(ensemble, model)?;
    let nu_half = ensemble[0].nu.sqrt();
    let horizon = ensemble[0].horizon();
    let sups: Vec<f64> = ensemble
        .iter()
        .map(|r| r.energy.iter().fold(0.0f64, |m, e| m.max(*e)))
        .collect();
    let lhs = det_mean(&sups);
    let initial = det_mean(&ensemble.iter().map(|r| r.energy[0]).collect::<Vec<_>>());
    let noise_drift = horizon * nu_half * model.total_intensity();
    let mut martingale = 0.0;
    for m in 0..model.n_modes() {
        let per_path: Vec<f64> = ensemble
            .iter()
            .map(|r| {
                let sq: Vec<f64> = (0..=r.n_steps()).map(|j| r.cross_at(j)[m].powi(2)).collect();
                trapezoid(&r.times, &sq)
            })
            .collect();
        martingale += det_mean(&per_path).sqrt();
    }
    martingale *= nu_half;
    let base = initial + noise_drift;
    let rhs = base + k * martingale;
    let k_min = if lhs <= base {
        0.0
    } else if martingale > 0.0 {
        (lhs - base) / martingale
    } else {
        f64::INFINITY
    };
    Ok(UniformEnergyCheck {
        lhs,
        initial,
        noise_drift,
        martingale,
        k,
        rhs,
        satisfied: lhs <= rhs,
        margin: rhs - lhs,
        k_min,
    })
}
