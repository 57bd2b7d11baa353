//! Initial-condition factory.
//!
//! Every initial field is `rot psi` for a node stream function that vanishes
//! on both walls, so it is discretely divergence-free with zero wall-normal
//! velocity. Three classes are available:
//!
//! * smooth: a finite sum of modes `c trig(2 pi kx x / Lx) sin(ky pi y)`;
//! * rough: the smooth field plus a random series whose coefficients decay as
//!   `kx^{-(s+1)} ky^{-(s+1)}` up to a quarter of the grid wavenumbers. The
//!   coefficients depend only on `(seed, kx, ky)`, never on the grid, so the
//!   same function is refined as the grid grows: its `L^2` norm settles while
//!   its `H^1` norm diverges for `s <= 3/2`;
//! * mollified(m): the rough field with every coefficient multiplied by the
//!   Gaussian symbol `exp(-|k|^2 / (2 m^2))`, i.e. smoothed at scale `1/m`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::fields::{l2_norm, rot, BoundaryKind, Grid, Location, ScalarField, VelocityField};

/// One stream-function mode `amplitude * trig(2 pi kx x / Lx) * sin(ky pi y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamMode {
    pub kx: usize,
    pub ky: usize,
    pub amplitude: f64,
    /// `true` for `cos` in x, `false` for `sin`.
    #[serde(default)]
    pub cosine: bool,
}

/// Class of initial datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IcKind {
    Smooth,
    Rough,
    Mollified { m: f64 },
}

/// Parameters shared by all initial-condition classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcParams {
    /// Smooth modes; see [`IcParams::default_modes`].
    #[serde(default = "IcParams::default_modes")]
    pub modes: Vec<StreamMode>,
    /// Target `L^2` norm of the smooth part; `None` keeps the raw amplitudes.
    #[serde(default)]
    pub l2_amplitude: Option<f64>,
    /// Spectral decay exponent of the rough series.
    #[serde(default = "IcParams::default_decay")]
    pub decay: f64,
    /// `L^2` norm of the rough series (added on top of the smooth part).
    #[serde(default)]
    pub rough_amplitude: f64,
    /// Seed of the rough coefficients.
    #[serde(default)]
    pub rough_seed: u64,
}

impl Default for IcParams {
    fn default() -> Self {
        Self {
            modes: Self::default_modes(),
            l2_amplitude: None,
            decay: Self::default_decay(),
            rough_amplitude: 0.0,
            rough_seed: 0,
        }
    }
}

impl IcParams {
    pub fn default_modes() -> Vec<StreamMode> {
        vec![
            StreamMode { kx: 1, ky: 1, amplitude: 0.1, cosine: false },
            StreamMode { kx: 2, ky: 2, amplitude: 0.05, cosine: true },
            StreamMode { kx: 0, ky: 1, amplitude: 0.05, cosine: true },
        ]
    }

    fn default_decay() -> f64 {
        1.2
    }
}

fn sample_modes(grid: Grid, modes: &[(StreamMode, f64)]) -> ScalarField {
    // separable evaluation: psi(x_i, y_j) = sum_ky sin(ky pi y_j) g_ky(x_i)
    let (nx, ny) = (grid.nx(), grid.ny());
    let lx = grid.length_x();
    let mut by_ky: std::collections::BTreeMap<usize, Vec<f64>> = std::collections::BTreeMap::new();
    for (m, c) in modes {
        let row = by_ky.entry(m.ky).or_insert_with(|| vec![0.0; nx]);
        for (i, r) in row.iter_mut().enumerate() {
            let arg = 2.0 * PI * m.kx as f64 * grid.x_face(i) / lx;
            *r += c * if m.cosine { arg.cos() } else { arg.sin() };
        }
    }
    let mut psi = ScalarField::zeros(grid, Location::Node);
    for (ky, row) in &by_ky {
        for j in 1..ny {
            let sy = (*ky as f64 * PI * grid.y_node(j)).sin();
            for (i, r) in row.iter().enumerate() {
                let v = psi.get(i, j) + sy * r;
                psi.set(i, j, v);
            }
        }
    }
    psi
}

/// Squared continuous wavenumber of a mode.
fn wavenumber_sq(m: &StreamMode, lx: f64) -> f64 {
    let kx = 2.0 * PI * m.kx as f64 / lx;
    let ky = PI * m.ky as f64;
    kx * kx + ky * ky
}

/// Grid-independent random rough series with unit raw coefficients scale.
fn rough_modes(grid: &Grid, decay: f64, seed: u64) -> Vec<StreamMode> {
    let kx_max = (grid.nx() / 4).max(1);
    let ky_max = (grid.ny() / 4).max(1);
    let mut out = Vec::new();
    for ky in 1..=ky_max {
        for kx in 0..=kx_max {
            for cosine in [false, true] {
                if kx == 0 && !cosine {
                    continue;
                }
                let key = ((kx as u64) << 32) | ((ky as u64) << 1) | cosine as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(key);
                let z: f64 = StandardNormal.sample(&mut rng);
                let weight = ((kx.max(1) as f64) * ky as f64).powf(-(decay + 1.0));
                out.push(StreamMode { kx, ky, amplitude: z * weight, cosine });
            }
        }
    }
    out
}

/// Continuous `|rot psi|^2` of a mode sum; distinct modes are orthogonal.
fn continuous_energy(modes: &[(StreamMode, f64)], lx: f64) -> f64 {
    modes
        .iter()
        .map(|(m, c)| {
            let area = if m.kx == 0 { 0.5 * lx } else { 0.25 * lx };
            c * c * wavenumber_sq(m, lx) * area
        })
        .sum()
}

fn smooth_scale(grid: Grid, params: &IcParams) -> Result<f64> {
    match params.l2_amplitude {
        None => Ok(1.0),
        Some(target) => {
            let raw: Vec<_> = params.modes.iter().map(|m| (*m, m.amplitude)).collect();
            let n = l2_norm(&rot(&sample_modes(grid, &raw))?);
            if n == 0.0 {
                Ok(0.0)
            } else {
                Ok(target / n)
            }
        }
    }
}

/// Scale of the rough series: its continuous `L^2` norm, truncated at a
/// fixed reference wavenumber, equals `rough_amplitude`.
fn rough_scale(params: &IcParams, lx: f64) -> Result<f64> {
    if params.rough_amplitude == 0.0 {
        return Ok(0.0);
    }
    let reference = Grid::new(ROUGH_REFERENCE_CELLS, ROUGH_REFERENCE_CELLS, lx)?;
    let modes: Vec<_> = rough_modes(&reference, params.decay, params.rough_seed)
        .into_iter()
        .map(|m| (m, m.amplitude))
        .collect();
    Ok(params.rough_amplitude / continuous_energy(&modes, lx).sqrt())
}

/// Resolution whose wavenumber cutoff fixes the rough normalization.
const ROUGH_REFERENCE_CELLS: usize = 256;

/// Stream function of the requested initial datum.
pub fn initial_stream(kind: IcKind, grid: Grid, params: &IcParams) -> Result<ScalarField> {
    let ss = smooth_scale(grid, params)?;
    let mut terms: Vec<(StreamMode, f64)> = params.modes.iter().map(|m| (*m, m.amplitude * ss)).collect();
    match kind {
        IcKind::Smooth => {}
        IcKind::Rough | IcKind::Mollified { .. } => {
            if !(params.decay > 1.0) {
                return Err(LabError::config(format!(
                    "rough data need decay exponent s > 1, got {}",
                    params.decay
                )));
            }
            let rough = rough_modes(&grid, params.decay, params.rough_seed);
            let rs = rough_scale(params, grid.length_x())?;
            terms.extend(rough.iter().map(|m| (*m, m.amplitude * rs)));
        }
    }
    if let IcKind::Mollified { m } = kind {
        if !(m > 0.0) {
            return Err(LabError::config(format!("mollification index must be positive, got {m}")));
        }
        let eps2 = 1.0 / (m * m);
        let lx = grid.length_x();
        for (mode, c) in terms.iter_mut() {
            *c *= (-0.5 * eps2 * wavenumber_sq(mode, lx)).exp();
        }
    }
    Ok(sample_modes(grid, &terms))
}

/// Velocity field of the requested initial datum, tagged no-slip.
pub fn make_initial_condition(kind: IcKind, grid: Grid, params: &IcParams) -> Result<VelocityField> {
    Ok(rot(&initial_stream(kind, grid, params)?)?.with_bc(BoundaryKind::NoSlip))
}

/// Stream function `sum amplitude trig(2 pi kx x / Lx) sin(ky pi y)` of the
/// given modes, zero on both walls.
pub fn stream_from_modes(grid: Grid, modes: &[StreamMode]) -> ScalarField {
    let terms: Vec<_> = modes.iter().map(|m| (*m, m.amplitude)).collect();
    sample_modes(grid, &terms)
}

/// Fixed divergence-free direction used to perturb initial data,
/// normalized to unit `L^2` norm.
pub fn perturbation_direction(grid: Grid) -> Result<ScalarField> {
    let mode = StreamMode { kx: 3, ky: 2, amplitude: 1.0, cosine: true };
    let psi = sample_modes(grid, &[(mode, 1.0)]);
    let n = l2_norm(&rot(&psi)?);
    Ok(psi.scaled(1.0 / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{divergence, grad_linf_norm, h1_seminorm};

    fn rough_params() -> IcParams {
        IcParams {
            rough_amplitude: 0.3,
            rough_seed: 9,
            ..IcParams::default()
        }
    }

    #[test]
    fn initial_fields_are_solenoidal() {
        let g = Grid::new(32, 24, 2.0).unwrap();
        for kind in [IcKind::Smooth, IcKind::Rough, IcKind::Mollified { m: 8.0 }] {
            let u = make_initial_condition(kind, g, &rough_params()).unwrap();
            assert!(divergence(&u).max_abs() < 1e-11);
            assert_eq!(u.wall_normal_max(), 0.0);
        }
    }

    #[test]
    fn l2_amplitude_is_honoured() {
        let g = Grid::unit(32).unwrap();
        let p = IcParams { l2_amplitude: Some(0.7), ..IcParams::default() };
        let u = make_initial_condition(IcKind::Smooth, g, &p).unwrap();
        assert!((l2_norm(&u) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn decay_at_most_one_is_rejected() {
        let g = Grid::unit(16).unwrap();
        let p = IcParams { decay: 1.0, ..rough_params() };
        assert!(matches!(make_initial_condition(IcKind::Rough, g, &p), Err(LabError::Config(_))));
    }

    #[test]
    fn smooth_gradient_stays_bounded_under_refinement() {
        let norms: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| grad_linf_norm(&make_initial_condition(IcKind::Smooth, Grid::unit(n).unwrap(), &IcParams::default()).unwrap()))
            .collect();
        assert!((norms[2] / norms[1] - 1.0).abs() < 0.05, "{norms:?}");
        assert!((norms[1] / norms[0] - 1.0).abs() < 0.1, "{norms:?}");
    }

    #[test]
    fn rough_field_refines_in_l2_but_not_in_h1() {
        let p = IcParams { modes: vec![], decay: 1.2, ..rough_params() };
        let stats: Vec<(f64, f64)> = [64, 128, 256]
            .iter()
            .map(|&n| {
                let u = make_initial_condition(IcKind::Rough, Grid::unit(n).unwrap(), &p).unwrap();
                (l2_norm(&u), h1_seminorm(&u))
            })
            .collect();
        for w in stats.windows(2) {
            assert!((w[1].0 / w[0].0 - 1.0).abs() < 0.02, "{stats:?}");
            assert!(w[1].1 > 1.1 * w[0].1, "{stats:?}");
        }
    }

    #[test]
    fn mollified_fields_approach_rough_field_monotonically() {
        let g = Grid::unit(64).unwrap();
        let p = rough_params();
        let u = make_initial_condition(IcKind::Rough, g, &p).unwrap();
        let gaps: Vec<f64> = [4.0, 8.0, 16.0, 32.0]
            .iter()
            .map(|&m| l2_norm(&u.sub(&make_initial_condition(IcKind::Mollified { m }, g, &p).unwrap()).unwrap()))
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }
}
