//! Quadrature norms and boundary-layer norms.
//!
//! Two discrete gradients are in use:
//!
//! * the *diffusion gradient* behind [`h1_seminorm`] and the layer
//!   dissipation. Its four components live where the vector Laplacian
//!   differences them (cell centers and cell corners, with half-weight corner
//!   rows on the walls) so that `-<lap u, u> = |grad u|^2` exactly;
//! * the *center gradient* ([`super::ops::center_gradient`]), a pointwise
//!   tensor at cell centers used for sup norms and `rho`-weighted norms.

use serde::{Deserialize, Serialize};

use super::field::{Location, ScalarField, VelocityField};
use super::grid::{wall_distance, Grid};
use super::ops::{center_gradient, center_velocity};
use crate::error::{LabError, Result};

/// Quadrature `L^2` norm.
pub fn l2_norm(f: &VelocityField) -> f64 {
    l2_layer_sq(f, &LayerRegion::everywhere(f.grid())).sqrt()
}

/// Largest pointwise Euclidean magnitude of the cell-centered velocity.
pub fn linf_norm(f: &VelocityField) -> f64 {
    center_velocity(f)
        .iter()
        .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
}

/// `|grad f|_{L^2}` with the diffusion gradient.
pub fn h1_seminorm(f: &VelocityField) -> f64 {
    layered_grad_sq(f, f64::INFINITY).sqrt()
}

/// Sup norm of the pointwise Frobenius norm of the center gradient.
pub fn grad_linf_norm(f: &VelocityField) -> f64 {
    center_gradient(f)
        .iter()
        .fold(0.0, |m, g| m.max(frobenius(g)))
}

#[inline]
fn frobenius(g: &[f64; 4]) -> f64 {
    (g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]).sqrt()
}

/// Fraction of `[y0, y1]` covered by `{rho < delta}`.
pub fn layer_fraction(y0: f64, y1: f64, delta: f64) -> f64 {
    if delta >= 0.5 {
        return 1.0;
    }
    if delta <= 0.0 || y1 <= y0 {
        return 0.0;
    }
    let low = (y1.min(delta) - y0).max(0.0);
    let high = (y1 - y0.max(1.0 - delta)).max(0.0);
    ((low + high) / (y1 - y0)).min(1.0)
}

/// Quadrature y-interval attached to center row `j`.
fn center_interval(g: &Grid, j: usize) -> (f64, f64) {
    (g.y_node(j), g.y_node(j + 1))
}

/// Quadrature y-interval attached to node row `j` (half cells at the walls).
fn node_interval(g: &Grid, j: usize) -> (f64, f64) {
    let h = 0.5 * g.dy();
    ((g.y_node(j) - h).max(0.0), (g.y_node(j) + h).min(1.0))
}

/// Quadrature area of one sample in node row `j`.
#[inline]
fn node_area(g: &Grid, j: usize) -> f64 {
    if j == 0 || j == g.ny() {
        0.5 * g.cell_area()
    } else {
        g.cell_area()
    }
}

/// The wall strip `Gamma_delta = {rho < delta}` on a grid, stored as the
/// fraction of each quadrature row that lies inside the strip.
///
/// Fractions are monotone in `delta` and identically 1 once `delta >= 1/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRegion {
    delta: f64,
    center_weights: Vec<f64>,
    node_weights: Vec<f64>,
}

impl LayerRegion {
    pub fn new(grid: &Grid, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(LabError::InvalidInput(format!("layer width must be positive, got {delta}")));
        }
        let center_weights = (0..grid.ny())
            .map(|j| {
                let (a, b) = center_interval(grid, j);
                layer_fraction(a, b, delta)
            })
            .collect();
        let node_weights = (0..=grid.ny())
            .map(|j| {
                let (a, b) = node_interval(grid, j);
                layer_fraction(a, b, delta)
            })
            .collect();
        Ok(Self {
            delta,
            center_weights,
            node_weights,
        })
    }

    /// The whole channel.
    pub fn everywhere(grid: &Grid) -> Self {
        Self {
            delta: f64::INFINITY,
            center_weights: vec![1.0; grid.ny()],
            node_weights: vec![1.0; grid.ny() + 1],
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Whether the layer spans more than one cell.
    pub fn resolved(&self, grid: &Grid) -> bool {
        self.delta > grid.dy()
    }

    pub fn center_weights(&self) -> &[f64] {
        &self.center_weights
    }

    pub fn node_weights(&self) -> &[f64] {
        &self.node_weights
    }

    /// Indicator of rows touching the strip at cell centers.
    pub fn center_mask(&self) -> Vec<bool> {
        self.center_weights.iter().map(|w| *w > 0.0).collect()
    }

    /// True when the strip covers the channel.
    pub fn covers_domain(&self) -> bool {
        self.delta >= 0.5
    }
}

fn layered_grad_sq(f: &VelocityField, delta: f64) -> f64 {
    let g = *f.grid();
    let region = if delta >= 0.5 {
        LayerRegion::everywhere(&g)
    } else {
        LayerRegion::new(&g, delta).expect("positive width")
    };
    layered_grad_sq_region(f, &region)
}

/// `|grad f|^2_{L^2(Gamma)}` with the diffusion gradient.
fn layered_grad_sq_region(f: &VelocityField, region: &LayerRegion) -> f64 {
    let g = *f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (dx, dy) = (g.dx(), g.dy());
    let (ux, uy) = (f.ux(), f.uy());
    let cw = region.center_weights();
    let nw = region.node_weights();
    let mut total = 0.0;
    // d_x ux and d_y uy at cell centers
    for j in 0..ny {
        if cw[j] == 0.0 {
            continue;
        }
        let mut s = 0.0;
        for i in 0..nx {
            let a = (ux[j * nx + g.ip(i)] - ux[j * nx + i]) / dx;
            let b = (uy[(j + 1) * nx + i] - uy[j * nx + i]) / dy;
            s += a * a + b * b;
        }
        total += s * g.cell_area() * cw[j];
    }
    // d_y ux and d_x uy at cell corners; wall corners use the ghost ux[-1] = -ux[0]
    for j in 0..=ny {
        if nw[j] == 0.0 {
            continue;
        }
        let mut s = 0.0;
        for i in 0..nx {
            let dyux = if j == 0 {
                2.0 * ux[i] / dy
            } else if j == ny {
                -2.0 * ux[(ny - 1) * nx + i] / dy
            } else {
                (ux[j * nx + i] - ux[(j - 1) * nx + i]) / dy
            };
            let dxuy = (uy[j * nx + g.ip(i)] - uy[j * nx + i]) / dx;
            s += dyux * dyux + dxuy * dxuy;
        }
        total += s * node_area(&g, j) * nw[j];
    }
    total
}

/// Boundary-layer norms of a velocity field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerNorms {
    pub delta: f64,
    /// `|f|_{L^2(Gamma_delta)}`.
    pub l2_layer: f64,
    /// `|grad f|_{L^2(Gamma_delta)}`, diffusion gradient.
    pub grad_l2_layer: f64,
    /// `|f / rho|_{L^2(Gamma_delta)}` over samples with `rho >= dy / 2`.
    pub hardy_quotient: f64,
    /// `|rho grad f|_{L^inf}`.
    pub rho_grad_linf: f64,
    /// `|rho^2 grad f|_{L^inf}`.
    pub rho2_grad_linf: f64,
    /// `|rho grad f|_{L^2}`.
    pub rho_grad_l2: f64,
    /// `hardy_quotient / grad_l2_layer`, 0 when the gradient vanishes.
    pub hardy_ratio: f64,
    /// Set when `delta <= dy`; the numbers are then quadrature-dominated.
    pub under_resolved: bool,
    /// Samples closer to the wall than this are left out of `hardy_quotient`.
    pub hardy_cutoff: f64,
}

/// `|f|^2_{L^2(Gamma)}`.
pub fn l2_layer_sq(f: &VelocityField, region: &LayerRegion) -> f64 {
    let g = *f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let cw = region.center_weights();
    let nw = region.node_weights();
    let mut total = 0.0;
    for j in 0..ny {
        if cw[j] > 0.0 {
            let s: f64 = f.ux()[j * nx..(j + 1) * nx].iter().map(|v| v * v).sum();
            total += s * g.cell_area() * cw[j];
        }
    }
    for j in 0..=ny {
        if nw[j] > 0.0 {
            let s: f64 = f.uy()[j * nx..(j + 1) * nx].iter().map(|v| v * v).sum();
            total += s * node_area(&g, j) * nw[j];
        }
    }
    total
}

/// `|grad f|^2_{L^2(Gamma)}` with the diffusion gradient; equals
/// `h1_seminorm(f)^2` bitwise when the region covers the channel.
pub fn grad_l2_layer_sq(f: &VelocityField, region: &LayerRegion) -> f64 {
    layered_grad_sq_region(f, region)
}

/// All boundary-layer norms of `f` on `region`. `rho` must be the
/// cell-centered wall distance of the same grid.
pub fn layer_norms(f: &VelocityField, region: &LayerRegion, rho: &ScalarField) -> Result<LayerNorms> {
    let g = *f.grid();
    g.ensure_same(rho.grid(), "layer norms")?;
    if rho.location() != Location::Center {
        return Err(LabError::shape("layer norms expect a cell-centered distance field"));
    }
    if region.center_weights().len() != g.ny() {
        return Err(LabError::shape("layer region built on a different grid"));
    }
    let (nx, ny) = (g.nx(), g.ny());
    let dy = g.dy();
    let l2_layer = l2_layer_sq(f, region).sqrt();
    let grad_l2_layer = grad_l2_layer_sq(f, region).sqrt();

    // f / rho at native sample locations
    let cutoff = 0.5 * dy;
    let cw = region.center_weights();
    let nw = region.node_weights();
    let mut hardy = 0.0;
    for j in 0..ny {
        let r = wall_distance(g.y_center(j));
        if cw[j] > 0.0 && r >= cutoff {
            let s: f64 = f.ux()[j * nx..(j + 1) * nx].iter().map(|v| v * v).sum();
            hardy += s / (r * r) * g.cell_area() * cw[j];
        }
    }
    for j in 0..=ny {
        let r = wall_distance(g.y_node(j));
        if nw[j] > 0.0 && r >= cutoff {
            let s: f64 = f.uy()[j * nx..(j + 1) * nx].iter().map(|v| v * v).sum();
            hardy += s / (r * r) * node_area(&g, j) * nw[j];
        }
    }
    let hardy_quotient = hardy.sqrt();

    let grads = center_gradient(f);
    let rv = rho.values();
    let mut rho_grad_linf = 0.0f64;
    let mut rho2_grad_linf = 0.0f64;
    let mut rho_grad_sq = 0.0;
    for (k, gr) in grads.iter().enumerate() {
        let m = frobenius(gr);
        let r = rv[k];
        rho_grad_linf = rho_grad_linf.max(r * m);
        rho2_grad_linf = rho2_grad_linf.max(r * r * m);
        rho_grad_sq += r * r * m * m;
    }
    let rho_grad_l2 = (rho_grad_sq * g.cell_area()).sqrt();

    Ok(LayerNorms {
        delta: region.delta(),
        l2_layer,
        grad_l2_layer,
        hardy_quotient,
        rho_grad_linf,
        rho2_grad_linf,
        rho_grad_l2,
        hardy_ratio: if grad_l2_layer > 0.0 {
            hardy_quotient / grad_l2_layer
        } else {
            0.0
        },
        under_resolved: !region.resolved(&g),
        hardy_cutoff: cutoff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::field::BoundaryKind;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rho(g: Grid) -> ScalarField {
        ScalarField::from_fn(g, Location::Center, |_, y| wall_distance(y))
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let g = Grid::unit(16).unwrap();
        let z = VelocityField::zeros(g, BoundaryKind::NoSlip);
        assert_eq!(l2_norm(&z), 0.0);
        assert_eq!(h1_seminorm(&z), 0.0);
        assert_eq!(linf_norm(&z), 0.0);
        let n = layer_norms(&z, &LayerRegion::new(&g, 0.25).unwrap(), &rho(g)).unwrap();
        for v in [n.l2_layer, n.grad_l2_layer, n.hardy_quotient, n.rho_grad_linf, n.rho2_grad_linf, n.rho_grad_l2] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn constant_field_has_unit_norm() {
        let g = Grid::unit(16).unwrap();
        let f = VelocityField::from_fn(g, BoundaryKind::Free, |_, _| (1.0, 0.0));
        assert!((l2_norm(&f) - 1.0).abs() < 1e-14);
        assert!((linf_norm(&f) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn product_of_sines_has_norm_one_half() {
        // int_0^1 int_0^1 sin^2(2 pi x) sin^2(pi y) = 1/4
        let g = Grid::unit(64).unwrap();
        let f = VelocityField::from_fn(g, BoundaryKind::Free, |x, y| ((2.0 * PI * x).sin() * (PI * y).sin(), 0.0));
        assert!((l2_norm(&f) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn full_layer_matches_global_norms() {
        let g = Grid::new(16, 20, 1.5).unwrap();
        let f = VelocityField::from_fn(g, BoundaryKind::NoSlip, |x, y| ((3.0 * x).sin() * y, (x + y).cos()));
        for delta in [0.5, 0.75, 3.0] {
            let n = layer_norms(&f, &LayerRegion::new(&g, delta).unwrap(), &rho(g)).unwrap();
            assert_eq!(n.l2_layer, l2_norm(&f));
            assert_eq!(n.grad_l2_layer, h1_seminorm(&f));
        }
    }

    #[test]
    fn support_outside_layer_gives_zero() {
        let g = Grid::unit(32).unwrap();
        let f = VelocityField::from_fn(g, BoundaryKind::Free, |_, y| {
            if (0.3..0.7).contains(&y) { (1.0, 1.0) } else { (0.0, 0.0) }
        });
        let n = layer_norms(&f, &LayerRegion::new(&g, 0.2).unwrap(), &rho(g)).unwrap();
        assert_eq!(n.l2_layer, 0.0);
    }

    #[test]
    fn thin_layer_is_flagged() {
        let g = Grid::unit(16).unwrap();
        let f = VelocityField::from_fn(g, BoundaryKind::Free, |_, _| (1.0, 0.0));
        let n = layer_norms(&f, &LayerRegion::new(&g, 0.5 / 16.0).unwrap(), &rho(g)).unwrap();
        assert!(n.under_resolved);
        assert!(n.l2_layer > 0.0);
    }

    proptest! {
        #[test]
        fn layer_norm_is_monotone_in_width(d1 in 0.001f64..0.6, d2 in 0.001f64..0.6, c in -3.0f64..3.0) {
            let g = Grid::new(12, 16, 1.0).unwrap();
            let f = VelocityField::from_fn(g, BoundaryKind::NoSlip, |x, y| ((5.0 * x).sin() + y, c * x * y));
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let a = l2_layer_sq(&f, &LayerRegion::new(&g, lo).unwrap());
            let b = l2_layer_sq(&f, &LayerRegion::new(&g, hi).unwrap());
            prop_assert!(a <= b * (1.0 + 1e-14) + 1e-300);
        }

        #[test]
        fn norms_are_absolutely_homogeneous(c in -50.0f64..50.0) {
            let g = Grid::new(12, 10, 1.0).unwrap();
            let f = VelocityField::from_fn(g, BoundaryKind::NoSlip, |x, y| ((6.0 * x).cos() * y, (2.0 * y).sin() + x));
            let cf = f.scaled(c);
            let r = rho(g);
            let region = LayerRegion::new(&g, 0.3).unwrap();
            let (n, cn) = (layer_norms(&f, &region, &r).unwrap(), layer_norms(&cf, &region, &r).unwrap());
            let pairs = [
                (l2_norm(&f), l2_norm(&cf)),
                (h1_seminorm(&f), h1_seminorm(&cf)),
                (linf_norm(&f), linf_norm(&cf)),
                (grad_linf_norm(&f), grad_linf_norm(&cf)),
                (n.l2_layer, cn.l2_layer),
                (n.grad_l2_layer, cn.grad_l2_layer),
                (n.hardy_quotient, cn.hardy_quotient),
                (n.rho_grad_linf, cn.rho_grad_linf),
                (n.rho2_grad_linf, cn.rho2_grad_linf),
                (n.rho_grad_l2, cn.rho_grad_l2),
            ];
            for (a, b) in pairs {
                prop_assert!((c.abs() * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }
}
