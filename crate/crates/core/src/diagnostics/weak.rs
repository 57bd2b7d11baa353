//! Weak formulation with time-dependent test functions and the fixed
//! dictionary of test fields used for weak-convergence gaps.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::record::TrajectoryRecord;
use crate::dynamics::noise::noise_profile;
use crate::error::{LabError, Result};
use crate::fields::{l2_norm, rot, BoundaryKind, Grid, Location, ScalarField, VelocityField};
use crate::stats::cumulative_trapezoid;

/// Scalar time profile `g` of a separable test function `phi(t) = g(t) phi0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum TimeProfile {
    Constant,
    /// `1 - t / horizon`.
    Linear { horizon: f64 },
    /// `cos(2 pi frequency t)`.
    Cosine { frequency: f64 },
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Linear { horizon } => 1.0 - t / horizon,
            TimeProfile::Cosine { frequency } => (2.0 * PI * frequency * t).cos(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 0.0,
            TimeProfile::Linear { horizon } => -1.0 / horizon,
            TimeProfile::Cosine { frequency } => -2.0 * PI * frequency * (2.0 * PI * frequency * t).sin(),
        }
    }
}

/// Weak-formulation gap at each checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakResidual {
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub gap: Vec<f64>,
}

impl WeakResidual {
    pub fn max_gap(&self) -> f64 {
        self.gap.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Two-sided gap of
///
/// ```text
/// <u(t), phi(t)> = <u(0), phi(0)> + int <u, d_s phi> - nu int <grad u, grad phi>
///                + int b(u, phi, u) + nu^{1/2} sum_k <sigma_k, phi(t)> W^k_t
///                - nu^{1/2} sum_k int <sigma_k, d_s phi> W^k_s ds
/// ```
///
/// for `phi(t) = profile(t) phi0`, where `phi0` is the `probe`-th test field
/// recorded with the path. Time integrals use the trapezoid rule on the
/// solver grid.
pub fn weak_formulation_residual(record: &TrajectoryRecord, probe: usize, profile: TimeProfile) -> Result<WeakResidual> {
    let p = record
        .probes
        .get(probe)
        .ok_or_else(|| LabError::config(format!("record has no probe {probe}")))?;
    let t = &record.times;
    let n = t.len();
    if p.inner.len() != n {
        return Err(LabError::config("probe series do not cover the time grid"));
    }
    let g: Vec<f64> = t.iter().map(|s| profile.value(*s)).collect();
    let dg: Vec<f64> = t.iter().map(|s| profile.derivative(*s)).collect();
    let transport: Vec<f64> = (0..n).map(|j| dg[j] * p.inner[j]).collect();
    let viscous: Vec<f64> = (0..n).map(|j| g[j] * p.grad_inner[j]).collect();
    let advective: Vec<f64> = (0..n).map(|j| g[j] * p.advective[j]).collect();
    let transport = cumulative_trapezoid(t, &transport);
    let viscous = cumulative_trapezoid(t, &viscous);
    let advective = cumulative_trapezoid(t, &advective);

    // sum_k <sigma_k, phi0> W^k(t_j)
    let mut noise = vec![0.0; n];
    for (k, s) in p.sigma_inner.iter().enumerate() {
        for (j, w) in record.noise.running_sum(k).into_iter().enumerate() {
            noise[j] += s * w;
        }
    }
    let noise_correction: Vec<f64> = (0..n).map(|j| dg[j] * noise[j]).collect();
    let noise_correction = cumulative_trapezoid(t, &noise_correction);
    let nu_half = record.nu.sqrt();

    let mut out = WeakResidual {
        times: Vec::new(),
        lhs: Vec::new(),
        rhs: Vec::new(),
        gap: Vec::new(),
    };
    for c in &record.checkpoints {
        let j = c.index;
        let lhs = g[j] * p.inner[j];
        let rhs = g[0] * p.inner[0] + transport[j] - record.nu * viscous[j]
            + advective[j]
            + nu_half * (g[j] * noise[j] - noise_correction[j]);
        out.times.push(t[j]);
        out.lhs.push(lhs);
        out.rhs.push(rhs);
        out.gap.push(lhs - rhs);
    }
    Ok(out)
}

/// `(kx, q, cosine)` of the dictionary stream functions
/// `sin^2(pi y) cos(q pi y) trig(2 pi kx x / Lx)`.
const DICTIONARY: [(usize, usize, bool); 8] = [
    (0, 0, true),
    (0, 1, true),
    (1, 0, false),
    (1, 0, true),
    (1, 1, false),
    (2, 0, false),
    (2, 1, true),
    (3, 0, true),
];

/// Eight smooth divergence-free fields with vanishing wall trace, each of
/// unit `L^2` norm.
pub fn test_dictionary(grid: Grid) -> Result<Vec<VelocityField>> {
    let lx = grid.length_x();
    DICTIONARY
        .iter()
        .map(|&(kx, q, cosine)| {
            let mut psi = ScalarField::from_fn(grid, Location::Node, |x, y| {
                let arg = 2.0 * PI * kx as f64 * x / lx;
                let trig = if cosine { arg.cos() } else { arg.sin() };
                noise_profile(y).0 * (q as f64 * PI * y).cos() * trig
            });
            let ny = grid.ny();
            for i in 0..grid.nx() {
                psi.set(i, 0, 0.0);
                psi.set(i, ny, 0.0);
            }
            let phi = rot(&psi)?;
            let norm = l2_norm(&phi);
            Ok(phi.scaled(1.0 / norm).with_bc(BoundaryKind::NoPenetration))
        })
        .collect()
}
