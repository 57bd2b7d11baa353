//! The four condition functionals of the inviscid-limit equivalence:
//! `sup_t E|u - u_bar|^2`, `E sup_t |u - u_bar|^2`, weak gaps against a
//! fixed dictionary, and total and boundary-layer dissipation.

use serde::{Deserialize, Serialize};

use super::record::TrajectoryRecord;
use super::reference::EulerTrajectory;
use crate::error::{LabError, Result};
use crate::fields::{l2_norm, VelocityField};
use crate::stats::{trapezoid, Estimate};

/// Total and boundary-layer dissipation, `nu int_0^T E|grad u|^2` over the
/// channel and over `Gamma_{c nu}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KatoFunctionals {
    pub c: f64,
    pub delta: f64,
    pub d_total: Estimate,
    pub d_layer: Estimate,
    pub under_resolved: bool,
}

pub fn kato_functionals(ensemble: &[TrajectoryRecord], c: f64) -> Result<KatoFunctionals> {
    let first = ensemble.first().ok_or_else(|| LabError::config("empty ensemble"))?;
    let nu = first.nu;
    let delta = first.layer_delta;
    for r in ensemble {
        if r.nu != nu || r.layer_delta != delta {
            return Err(LabError::config("ensemble members differ in viscosity or layer width"));
        }
    }
    let expected = (c * nu).min(0.5);
    if (delta - expected).abs() > 1e-12 * expected.max(1.0) {
        return Err(LabError::config(format!(
            "records carry layer width {delta}, expected c nu = {expected}"
        )));
    }
    let total: Vec<f64> = ensemble.iter().map(|r| nu * trapezoid(&r.times, &r.dissipation)).collect();
    let layer: Vec<f64> = ensemble
        .iter()
        .map(|r| nu * trapezoid(&r.times, &r.layer_dissipation))
        .collect();
    Ok(KatoFunctionals {
        c,
        delta,
        d_total: Estimate::from_samples(&total),
        d_layer: Estimate::from_samples(&layer),
        under_resolved: first.layer_under_resolved,
    })
}

/// Distances between Navier-Stokes paths and the Euler reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceMetrics {
    /// `max_c E|u(t_c) - u_bar(t_c)|^2`.
    pub m1: Estimate,
    /// `E max_c |u(t_c) - u_bar(t_c)|^2`.
    pub m2: Estimate,
    /// `max_c |E<u(t_c), phi_j> - <u_bar(t_c), phi_j>|` per dictionary field.
    pub weak_gaps: Vec<Estimate>,
    pub checkpoint_times: Vec<f64>,
}

impl ConvergenceMetrics {
    pub fn weak_gap_max(&self) -> f64 {
        self.weak_gaps.iter().fold(0.0, |m, g| m.max(g.mean))
    }
}

/// Per-path gaps and dictionary inner products at every checkpoint, taken
/// from recorded probes or, failing that, from stored snapshots.
fn path_data(
    record: &TrajectoryRecord,
    reference: &EulerTrajectory,
    dictionary: &[VelocityField],
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if record.checkpoints.len() != reference.velocities.len() {
        return Err(LabError::config(format!(
            "path has {} checkpoints, reference has {}",
            record.checkpoints.len(),
            reference.velocities.len()
        )));
    }
    let mut gaps = Vec::with_capacity(record.checkpoints.len());
    let mut inner = Vec::with_capacity(record.checkpoints.len());
    for (c, cp) in record.checkpoints.iter().enumerate() {
        let gap = match (cp.gap_sq, &cp.velocity) {
            (Some(g), _) => g,
            (None, Some(u)) => {
                reference.grid().ensure_same(u.grid(), "convergence metrics")?;
                l2_norm(&u.sub(&reference.velocities[c])?).powi(2)
            }
            (None, None) => {
                return Err(LabError::config("record has neither reference gaps nor snapshots"))
            }
        };
        let ip = if cp.dictionary_inner.len() == dictionary.len() {
            cp.dictionary_inner.clone()
        } else if let Some(u) = &cp.velocity {
            dictionary.iter().map(|phi| u.dot(phi)).collect::<Result<Vec<_>>>()?
        } else {
            return Err(LabError::config("record lacks dictionary inner products"));
        };
        gaps.push(gap);
        inner.push(ip);
    }
    Ok((gaps, inner))
}

fn grid_matches(record: &TrajectoryRecord, reference: &EulerTrajectory) -> bool {
    record.nx == reference.grid().nx() && record.ny == reference.grid().ny()
}

pub fn convergence_metrics(
    ensemble: &[TrajectoryRecord],
    reference: &EulerTrajectory,
    dictionary: &[VelocityField],
) -> Result<ConvergenceMetrics> {
    if ensemble.is_empty() {
        return Err(LabError::config("empty ensemble"));
    }
    if ensemble.iter().any(|r| !grid_matches(r, reference)) {
        return Err(LabError::config("ensemble and reference live on different grids"));
    }
    for phi in dictionary {
        reference.grid().ensure_same(phi.grid(), "test dictionary")?;
    }
    let data = ensemble
        .iter()
        .map(|r| path_data(r, reference, dictionary))
        .collect::<Result<Vec<_>>>()?;
    let n_cp = reference.velocities.len();

    let mut m1 = Estimate::ZERO;
    for c in 0..n_cp {
        let column: Vec<f64> = data.iter().map(|(g, _)| g[c]).collect();
        let e = Estimate::from_samples(&column);
        if c == 0 || e.mean > m1.mean {
            m1 = e;
        }
    }
    let maxes: Vec<f64> = data
        .iter()
        .map(|(g, _)| g.iter().fold(0.0f64, |m, v| m.max(*v)))
        .collect();
    let m2 = Estimate::from_samples(&maxes);

    let mut weak_gaps = Vec::with_capacity(dictionary.len());
    for (j, phi) in dictionary.iter().enumerate() {
        let mut worst = Estimate::ZERO;
        for c in 0..n_cp {
            let target = reference.velocities[c].dot(phi)?;
            let column: Vec<f64> = data.iter().map(|(_, ip)| ip[c][j] - target).collect();
            let e = Estimate::from_samples(&column);
            let gap = Estimate { mean: e.mean.abs(), se: e.se };
            if gap.mean > worst.mean {
                worst = gap;
            }
        }
        weak_gaps.push(worst);
    }
    Ok(ConvergenceMetrics {
        m1,
        m2,
        weak_gaps,
        checkpoint_times: reference.checkpoint_times.clone(),
    })
}

/// All condition functionals at one viscosity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub nu: f64,
    pub m1: Estimate,
    pub m2: Estimate,
    pub d_total: Estimate,
    pub d_layer: Estimate,
    pub weak_gaps: Vec<Estimate>,
    pub weak_gap_max: f64,
    pub layer_delta: f64,
    pub layer_under_resolved: bool,
    pub paths_used: usize,
    pub paths_failed: usize,
    pub checkpoints: usize,
}

impl ConditionReport {
    pub fn assemble(
        ensemble: &[TrajectoryRecord],
        reference: &EulerTrajectory,
        dictionary: &[VelocityField],
        c: f64,
        paths_failed: usize,
    ) -> Result<Self> {
        let conv = convergence_metrics(ensemble, reference, dictionary)?;
        let kato = kato_functionals(ensemble, c)?;
        Ok(Self {
            nu: ensemble[0].nu,
            m1: conv.m1,
            m2: conv.m2,
            d_total: kato.d_total,
            d_layer: kato.d_layer,
            weak_gap_max: conv.weak_gap_max(),
            weak_gaps: conv.weak_gaps,
            layer_delta: kato.delta,
            layer_under_resolved: kato.under_resolved,
            paths_used: ensemble.len(),
            paths_failed,
            checkpoints: conv.checkpoint_times.len(),
        })
    }

    /// `M2 >= M1 >= 0` and `D_total >= D_layer >= 0`.
    pub fn invariants_hold(&self) -> bool {
        self.m2.mean >= self.m1.mean
            && self.m1.mean >= 0.0
            && self.d_total.mean >= self.d_layer.mean
            && self.d_layer.mean >= 0.0
    }
}
