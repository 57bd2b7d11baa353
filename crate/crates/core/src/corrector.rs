//! Kato's boundary-layer corrector `v = div(z a)` built from an Euler state.
//!
//! In the channel the skew-symmetric matrix `a = [[0, a12], [-a12, 0]]` is
//! realized by `a12 = psi`, so `div a = rot psi = u_bar` everywhere and `a`
//! vanishes on the walls. The cutoff composite is `z = xi(rho / delta)`.
//! The corrector is assembled with the product rule
//!
//! ```text
//! v_x = z d_y psi + psi d_y z,    v_y = -z d_x psi,
//! ```
//!
//! with `z` and `d_y z` evaluated exactly at every sample location. Every
//! sample with `rho >= delta` is therefore exactly zero, and at the walls
//! `z = 1`, `d_y z = 0` reproduce the trace of `u_bar`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{EulerState, EulerStepper, ForcingSpec};
use crate::error::{LabError, Result};
use crate::fields::{
    center_gradient, grad_linf_norm, l2_norm, layer_norms, linf_norm, wall_distance, BoundaryKind,
    Grid, LayerRegion, Location, ScalarField, SolveMethod, VelocityField,
};
use crate::stats::{log_log_fit, LineFit};

/// Bounds on `|xi|`, `|xi'|`, `|xi''|` for the quintic cutoff.
pub const CUTOFF_BOUNDS: [f64; 3] = [3.0, 30.0, 60.0];

/// Minimum number of cells across a layer in a scaling report.
pub const MIN_LAYER_CELLS: usize = 4;

/// Largest wall value of `psi` accepted as zero, relative to `1 + max|psi|`.
const WALL_TOLERANCE: f64 = 1e-12;

/// `xi(r) = 1 - r^3 (10 - 15 r + 6 r^2)` on `[0, 1]`, 0 beyond.
pub fn cutoff(r: f64) -> f64 {
    if r <= 0.0 {
        1.0
    } else if r >= 1.0 {
        0.0
    } else {
        1.0 - r * r * r * (10.0 - 15.0 * r + 6.0 * r * r)
    }
}

/// `xi'(r) = -30 r^2 (1 - r)^2`.
pub fn cutoff_d1(r: f64) -> f64 {
    if r <= 0.0 || r >= 1.0 {
        0.0
    } else {
        -30.0 * r * r * (1.0 - r) * (1.0 - r)
    }
}

/// `xi''(r) = -60 r (1 - r) (1 - 2 r)`.
pub fn cutoff_d2(r: f64) -> f64 {
    if r <= 0.0 || r >= 1.0 {
        0.0
    } else {
        -60.0 * r * (1.0 - r) * (1.0 - 2.0 * r)
    }
}

/// Wall distance `rho = min(y, 1 - y)` at the rows of `location`. Cell centers
/// also carry `ux`; nodes also carry `uy`, `psi` and `omega`.
pub fn distance_field(grid: Grid, location: Location) -> ScalarField {
    ScalarField::from_fn(grid, location, |_, y| wall_distance(y))
}

/// `z(y) = xi(rho(y) / delta)`.
fn z_of(y: f64, delta: f64) -> f64 {
    cutoff(wall_distance(y) / delta)
}

/// `d_y z(y)`; `d_y rho` is `+1` below the midline and `-1` above it.
fn dz_of(y: f64, delta: f64) -> f64 {
    let sign = if y < 0.5 { 1.0 } else { -1.0 };
    sign * cutoff_d1(wall_distance(y) / delta) / delta
}

/// The component `a12` of the skew matrix, equal to the stream function.
pub fn skew_from_euler(state: &EulerState) -> Result<ScalarField> {
    let psi = &state.stream;
    let ny = psi.grid().ny();
    let wall = psi.row(0).iter().chain(psi.row(ny)).fold(0.0f64, |m, v| m.max(v.abs()));
    if wall > WALL_TOLERANCE * (1.0 + psi.max_abs()) {
        return Err(LabError::InvalidInput(format!(
            "stream function does not vanish on the walls (max {wall:e})"
        )));
    }
    Ok(psi.clone())
}

/// Corrector and the fields it was assembled from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrectorBundle {
    pub delta: f64,
    /// Cell-centered wall distance.
    pub rho: ScalarField,
    /// `z = xi(rho / delta)` at nodes.
    pub z: ScalarField,
    pub a12: ScalarField,
    pub v: VelocityField,
    pub region: LayerRegion,
}

/// Builds `v = div(z a)` for a layer of width `delta`, `dy < delta <= 1/2`.
pub fn build_corrector(state: &EulerState, delta: f64) -> Result<CorrectorBundle> {
    let g = *state.stream.grid();
    if !(delta > g.dy()) {
        return Err(LabError::UnderResolved {
            delta,
            dy: g.dy(),
            min_cells: 1,
        });
    }
    if delta > 0.5 {
        return Err(LabError::config(format!("layer width {delta} exceeds the half channel")));
    }
    let a12 = skew_from_euler(state)?;
    let (nx, ny) = (g.nx(), g.ny());
    let u = &state.velocity;
    let psi = a12.values();

    let mut vx = vec![0.0; nx * ny];
    for j in 0..ny {
        let y = g.y_center(j);
        let (z, dz) = (z_of(y, delta), dz_of(y, delta));
        if z == 0.0 && dz == 0.0 {
            continue;
        }
        for i in 0..nx {
            let psi_face = 0.5 * (psi[j * nx + i] + psi[(j + 1) * nx + i]);
            vx[j * nx + i] = z * u.ux_at(i, j) + psi_face * dz;
        }
    }
    let mut vy = vec![0.0; nx * (ny + 1)];
    for j in 0..=ny {
        let z = z_of(g.y_node(j), delta);
        if z == 0.0 {
            continue;
        }
        for i in 0..nx {
            vy[j * nx + i] = z * u.uy_at(i, j);
        }
    }
    let v = VelocityField::from_parts(g, vx, vy, BoundaryKind::NoPenetration)?;
    Ok(CorrectorBundle {
        delta,
        rho: distance_field(g, Location::Center),
        z: ScalarField::from_fn(g, Location::Node, |_, y| z_of(y, delta)),
        a12,
        v,
        region: LayerRegion::new(&g, delta)?,
    })
}

/// Second-order one-sided wall value of `d_y phi` for a node field,
/// `(bottom row i, top row i)`.
fn wall_dy(phi: &ScalarField, i: usize) -> (f64, f64) {
    let g = phi.grid();
    let (ny, dy) = (g.ny(), g.dy());
    let p = |j: usize| phi.get(i, j);
    (
        (-3.0 * p(0) + 4.0 * p(1) - p(2)) / (2.0 * dy),
        (3.0 * p(ny) - 4.0 * p(ny - 1) + p(ny - 2)) / (2.0 * dy),
    )
}

/// Largest wall value of the tangential component of `u_bar - v`.
///
/// Both traces use the same one-sided derivative of `psi`; the trace of `v`
/// follows the product rule with the exact wall values of `z` and `d_y z`.
pub fn trace_mismatch(bundle: &CorrectorBundle) -> f64 {
    let g = *bundle.a12.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (z0, z1) = (z_of(0.0, bundle.delta), z_of(1.0, bundle.delta));
    let (d0, d1) = (dz_of(0.0, bundle.delta), dz_of(1.0, bundle.delta));
    let mut worst = 0.0f64;
    for i in 0..nx {
        let (ub, ut) = wall_dy(&bundle.a12, i);
        let vb = z0 * ub + bundle.a12.get(i, 0) * d0;
        let vt = z1 * ut + bundle.a12.get(i, ny) * d1;
        worst = worst.max((ub - vb).abs()).max((ut - vt).abs());
    }
    worst
}

/// The eight corrector norms at one layer width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectorNorms {
    pub delta: f64,
    pub v_linf: f64,
    pub v_l2: f64,
    pub dtv_l2: f64,
    pub grad_linf: f64,
    pub grad_l2: f64,
    pub rho_grad_linf: f64,
    pub rho2_grad_linf: f64,
    pub rho_grad_l2: f64,
}

impl CorrectorNorms {
    /// Column names in table order, after `delta`.
    pub const NAMES: [&'static str; 8] = [
        "v_linf",
        "v_l2",
        "dtv_l2",
        "grad_linf",
        "grad_l2",
        "rho_grad_linf",
        "rho2_grad_linf",
        "rho_grad_l2",
    ];

    /// Exponents `p` in `norm <= K delta^p`, in table order.
    pub const EXPONENTS: [f64; 8] = [0.0, 0.5, 0.5, -1.0, -0.5, 0.0, 1.0, 0.5];

    pub fn values(&self) -> [f64; 8] {
        [
            self.v_linf,
            self.v_l2,
            self.dtv_l2,
            self.grad_linf,
            self.grad_l2,
            self.rho_grad_linf,
            self.rho2_grad_linf,
            self.rho_grad_l2,
        ]
    }
}

/// `|grad f|_{L^2}` with the pointwise center gradient. Unlike the diffusion
/// gradient it does not assume a vanishing wall trace.
fn center_grad_l2(f: &VelocityField) -> f64 {
    let area = f.grid().cell_area();
    let s: f64 = center_gradient(f)
        .iter()
        .map(|g| g.iter().map(|c| c * c).sum::<f64>())
        .sum();
    (s * area).sqrt()
}

fn norms_of(bundle: &CorrectorBundle, dtv: &VelocityField) -> Result<CorrectorNorms> {
    let g = *bundle.v.grid();
    let weighted = layer_norms(&bundle.v, &LayerRegion::everywhere(&g), &bundle.rho)?;
    Ok(CorrectorNorms {
        delta: bundle.delta,
        v_linf: linf_norm(&bundle.v),
        v_l2: l2_norm(&bundle.v),
        dtv_l2: l2_norm(dtv),
        grad_linf: grad_linf_norm(&bundle.v),
        grad_l2: center_grad_l2(&bundle.v),
        rho_grad_linf: weighted.rho_grad_linf,
        rho2_grad_linf: weighted.rho2_grad_linf,
        rho_grad_l2: weighted.rho_grad_l2,
    })
}

/// Fitted exponent of one norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub name: String,
    pub expected: f64,
    pub fit: LineFit,
    /// Measured constant `K = exp(intercept)`.
    pub constant: f64,
}

impl SlopeFit {
    pub fn within(&self, tolerance: f64) -> bool {
        (self.fit.slope - self.expected).abs() <= tolerance
    }
}

/// Eight norms per layer width and their log-log slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub nx: usize,
    pub ny: usize,
    pub time: f64,
    pub dt: f64,
    pub rows: Vec<CorrectorNorms>,
    pub slopes: Vec<SlopeFit>,
}

impl ScalingReport {
    pub fn slope(&self, name: &str) -> Option<&SlopeFit> {
        self.slopes.iter().find(|s| s.name == name)
    }
}

/// Confidence level of the slope intervals.
pub const SLOPE_CONFIDENCE: f64 = 0.95;

/// Corrector norms at each `delta` and fitted slopes of `log norm` against
/// `log delta`. `d_t v` is the centered difference of the correctors built
/// from Euler states at `t - dt` and `t + dt`.
pub fn corrector_scaling_report(state: &EulerState, deltas: &[f64], dt: f64) -> Result<ScalingReport> {
    let g = *state.stream.grid();
    if deltas.len() < 4 {
        return Err(LabError::config(format!(
            "a scaling report needs at least 4 layer widths, got {}",
            deltas.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(LabError::config(format!("time step must be positive, got {dt}")));
    }
    let min = MIN_LAYER_CELLS as f64 * g.dy();
    for &d in deltas {
        if !(d > min) {
            return Err(LabError::UnderResolved {
                delta: d,
                dy: g.dy(),
                min_cells: MIN_LAYER_CELLS,
            });
        }
        if d > 0.5 {
            return Err(LabError::config(format!("layer width {d} exceeds the half channel")));
        }
    }
    let stepper = EulerStepper::new(g, SolveMethod::Direct)?;
    let zero = ForcingSpec::zero();
    let ahead = stepper.step(state, dt, &zero)?;
    let behind = stepper.step(state, -dt, &zero)?;

    let rows = deltas
        .par_iter()
        .map(|&d| {
            let bundle = build_corrector(state, d)?;
            let plus = build_corrector(&ahead, d)?;
            let minus = build_corrector(&behind, d)?;
            let dtv = plus.v.sub(&minus.v)?.scaled(1.0 / (2.0 * dt));
            norms_of(&bundle, &dtv)
        })
        .collect::<Result<Vec<_>>>()?;

    let x: Vec<f64> = rows.iter().map(|r| r.delta).collect();
    let mut slopes = Vec::with_capacity(8);
    for (k, name) in CorrectorNorms::NAMES.iter().enumerate() {
        let y: Vec<f64> = rows.iter().map(|r| r.values()[k]).collect();
        let fit = log_log_fit(&x, &y, SLOPE_CONFIDENCE).ok_or_else(|| {
            LabError::Numerical(format!("cannot fit a slope for {name}: nonpositive norms"))
        })?;
        slopes.push(SlopeFit {
            name: (*name).to_string(),
            expected: CorrectorNorms::EXPONENTS[k],
            constant: fit.intercept.exp(),
            fit,
        });
    }
    Ok(ScalingReport {
        nx: g.nx(),
        ny: g.ny(),
        time: state.time,
        dt,
        rows,
        slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{initial_stream, IcKind, IcParams};
    use crate::fields::{divergence, rot};
    use std::f64::consts::PI;

    fn smooth_state(g: Grid) -> EulerState {
        let psi = initial_stream(IcKind::Smooth, g, &IcParams::default()).unwrap();
        EulerStepper::new(g, SolveMethod::Direct).unwrap().from_stream(&psi, 0.0).unwrap()
    }

    #[test]
    fn cutoff_endpoints_and_midpoint() {
        assert_eq!(cutoff(0.0), 1.0);
        assert_eq!(cutoff(1.0), 0.0);
        assert_eq!(cutoff(2.0), 0.0);
        assert!((cutoff(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cutoff_derivatives_match_differences_and_bounds() {
        let h = 1e-6;
        for k in 1..100 {
            let r = k as f64 / 100.0;
            let d1 = (cutoff(r + h) - cutoff(r - h)) / (2.0 * h);
            let d2 = (cutoff_d1(r + h) - cutoff_d1(r - h)) / (2.0 * h);
            assert!((d1 - cutoff_d1(r)).abs() < 1e-7);
            assert!((d2 - cutoff_d2(r)).abs() < 1e-6);
            assert!(cutoff(r).abs() <= CUTOFF_BOUNDS[0]);
            assert!(cutoff_d1(r).abs() <= CUTOFF_BOUNDS[1]);
            assert!(cutoff_d2(r).abs() <= CUTOFF_BOUNDS[2]);
        }
    }

    #[test]
    fn distance_field_samples() {
        let g = Grid::unit(10).unwrap();
        let rho = distance_field(g, Location::Node);
        assert!((rho.get(0, 3) - 0.3).abs() < 1e-15);
        assert_eq!(rho.get(0, 5), 0.5);
        assert_eq!(rho.get(0, 0), 0.0);
        assert_eq!(rho.get(0, 10), 0.0);
    }

    #[test]
    fn zero_stream_gives_zero_corrector() {
        let g = Grid::unit(32).unwrap();
        let st = EulerStepper::new(g, SolveMethod::Direct)
            .unwrap()
            .from_stream(&ScalarField::zeros(g, Location::Node), 0.0)
            .unwrap();
        let b = build_corrector(&st, 0.25).unwrap();
        assert!(b.v.is_zero());
        assert!(b.a12.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn skew_matrix_vanishes_on_walls_and_reproduces_velocity() {
        let g = Grid::unit(32).unwrap();
        let st = smooth_state(g);
        let a = skew_from_euler(&st).unwrap();
        assert!(a.row(0).iter().chain(a.row(32)).all(|v| *v == 0.0));
        assert_eq!(rot(&a).unwrap().ux(), st.velocity.ux());
    }

    #[test]
    fn nonzero_wall_stream_is_rejected() {
        let g = Grid::unit(16).unwrap();
        let mut st = smooth_state(g);
        st.stream.set(3, 0, 0.1);
        assert!(matches!(skew_from_euler(&st), Err(LabError::InvalidInput(_))));
    }

    #[test]
    fn support_is_exactly_the_layer() {
        let g = Grid::unit(64).unwrap();
        let st = smooth_state(g);
        let delta = 0.2;
        let b = build_corrector(&st, delta).unwrap();
        let (nx, ny) = (g.nx(), g.ny());
        for j in 0..ny {
            if wall_distance(g.y_center(j)) >= delta {
                assert!(b.v.ux()[j * nx..(j + 1) * nx].iter().all(|v| *v == 0.0));
            }
        }
        for j in 0..=ny {
            if wall_distance(g.y_node(j)) >= delta {
                assert!(b.v.uy()[j * nx..(j + 1) * nx].iter().all(|v| *v == 0.0));
            }
        }
        assert!(!b.v.is_zero());
    }

    #[test]
    fn trace_matches_euler_velocity() {
        let g = Grid::unit(64).unwrap();
        let st = smooth_state(g);
        for delta in [0.5, 0.25, 0.125] {
            assert!(trace_mismatch(&build_corrector(&st, delta).unwrap()) <= 1e-10);
        }
        let g = Grid::new(32, 64, 1.0).unwrap();
        let psi = ScalarField::from_fn(g, Location::Node, |x, y| (2.0 * PI * x).sin() * (PI * y).sin().powi(2));
        let st = EulerStepper::new(g, SolveMethod::Direct).unwrap().from_stream(&psi, 0.0).unwrap();
        assert!(trace_mismatch(&build_corrector(&st, 0.5).unwrap()) <= 1e-10);
    }

    #[test]
    fn divergence_residual_shrinks_under_refinement() {
        let errs: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                let g = Grid::unit(n).unwrap();
                divergence(&build_corrector(&smooth_state(g), 0.25).unwrap().v).max_abs()
            })
            .collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.0, "{errs:?}");
        }
    }

    #[test]
    fn thin_layers_are_refused() {
        let g = Grid::unit(32).unwrap();
        let st = smooth_state(g);
        assert!(matches!(build_corrector(&st, 1.0 / 32.0), Err(LabError::UnderResolved { .. })));
        let deltas = [0.25, 0.125, 0.0625, 0.1];
        assert!(matches!(
            corrector_scaling_report(&st, &deltas, 1e-3),
            Err(LabError::UnderResolved { .. })
        ));
        assert!(matches!(
            corrector_scaling_report(&st, &deltas[..3], 1e-3),
            Err(LabError::Config(_))
        ));
    }

    #[test]
    fn scaling_report_on_a_moderate_grid() {
        let g = Grid::new(64, 256, 1.0).unwrap();
        let st = smooth_state(g);
        let r = corrector_scaling_report(&st, &[0.25, 0.125, 0.0625, 0.03125], 1e-3).unwrap();
        assert_eq!(r.slopes.len(), 8);
        for s in &r.slopes {
            assert!(s.within(0.25), "{} slope {} expected {}", s.name, s.fit.slope, s.expected);
        }
    }
}
