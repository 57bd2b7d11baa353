//! Discrete differential operators on the staggered grid.
//!
//! `divergence` and `gradient` are exact negative adjoints of each other in
//! the quadrature inner products, and `divergence(rot(psi)) = 0` holds to
//! roundoff for every node field `psi`.

use super::field::{BoundaryKind, Location, ScalarField, VelocityField};
use crate::error::{LabError, Result};

/// Cell-centered divergence `(ux[i+1] - ux[i]) / dx + (uy[j+1] - uy[j]) / dy`.
pub fn divergence(f: &VelocityField) -> ScalarField {
    let g = *f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (idx, idy) = (1.0 / g.dx(), 1.0 / g.dy());
    let (ux, uy) = (f.ux(), f.uy());
    let mut out = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let ip = g.ip(i);
            out[j * nx + i] = (ux[j * nx + ip] - ux[j * nx + i]) * idx
                + (uy[(j + 1) * nx + i] - uy[j * nx + i]) * idy;
        }
    }
    ScalarField::from_values(g, Location::Center, out).expect("shape by construction")
}

/// Gradient of a cell-centered scalar onto the velocity faces; zero on the
/// wall rows of `uy`.
pub fn gradient(p: &ScalarField) -> Result<VelocityField> {
    if p.location() != Location::Center {
        return Err(LabError::shape("gradient expects a cell-centered scalar"));
    }
    let g = *p.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (idx, idy) = (1.0 / g.dx(), 1.0 / g.dy());
    let v = p.values();
    let mut ux = vec![0.0; nx * ny];
    let mut uy = vec![0.0; nx * (ny + 1)];
    for j in 0..ny {
        for i in 0..nx {
            ux[j * nx + i] = (v[j * nx + i] - v[j * nx + g.im(i)]) * idx;
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            uy[j * nx + i] = (v[j * nx + i] - v[(j - 1) * nx + i]) * idy;
        }
    }
    VelocityField::from_parts(g, ux, uy, BoundaryKind::NoPenetration)
}

/// Discrete `rot psi = (d_y psi, -d_x psi)` of a node field.
///
/// The result is exactly divergence-free. Its wall-normal component vanishes
/// whenever `psi` is constant along each wall.
pub fn rot(psi: &ScalarField) -> Result<VelocityField> {
    if psi.location() != Location::Node {
        return Err(LabError::shape("rot expects a node scalar"));
    }
    let g = *psi.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (idx, idy) = (1.0 / g.dx(), 1.0 / g.dy());
    let v = psi.values();
    let mut ux = vec![0.0; nx * ny];
    let mut uy = vec![0.0; nx * (ny + 1)];
    for j in 0..ny {
        for i in 0..nx {
            ux[j * nx + i] = (v[(j + 1) * nx + i] - v[j * nx + i]) * idy;
        }
    }
    for j in 0..=ny {
        for i in 0..nx {
            uy[j * nx + i] = -(v[j * nx + g.ip(i)] - v[j * nx + i]) * idx;
        }
    }
    VelocityField::from_parts(g, ux, uy, BoundaryKind::Free)
}

/// Node vorticity `d_x uy - d_y ux`.
///
/// Interior rows use the compact staggered stencil; the wall rows use the
/// second-order one-sided derivative of `ux` from the three nearest rows.
pub fn curl(f: &VelocityField) -> ScalarField {
    let g = *f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (idx, idy) = (1.0 / g.dx(), 1.0 / g.dy());
    let (ux, uy) = (f.ux(), f.uy());
    let mut out = vec![0.0; nx * (ny + 1)];
    for j in 0..=ny {
        for i in 0..nx {
            let im = g.im(i);
            let dxuy = (uy[j * nx + i] - uy[j * nx + im]) * idx;
            let dyux = if j == 0 {
                (-2.0 * ux[i] + 3.0 * ux[nx + i] - ux[2 * nx + i]) * idy
            } else if j == ny {
                (2.0 * ux[(ny - 1) * nx + i] - 3.0 * ux[(ny - 2) * nx + i] + ux[(ny - 3) * nx + i])
                    * idy
            } else {
                (ux[j * nx + i] - ux[(j - 1) * nx + i]) * idy
            };
            out[j * nx + i] = dxuy - dyux;
        }
    }
    ScalarField::from_values(g, Location::Node, out).expect("shape by construction")
}

/// Vector Laplacian with no-slip data.
///
/// `ux` uses the antisymmetric ghost `ux[-1] = -ux[0]`, which places the zero
/// tangential velocity exactly on the wall; interior `uy` rows use the stored
/// (zero) wall rows as Dirichlet data; wall rows of the result are zero.
/// With the quadrature inner product `-<lap u, u> = |grad u|^2` holds exactly,
/// where the gradient is the one in [`super::norms::h1_seminorm`].
pub fn vector_laplacian(f: &VelocityField) -> VelocityField {
    let g = *f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (idx2, idy2) = (1.0 / (g.dx() * g.dx()), 1.0 / (g.dy() * g.dy()));
    let (ux, uy) = (f.ux(), f.uy());
    let mut lx = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let c = ux[j * nx + i];
            let xx = ux[j * nx + g.ip(i)] - 2.0 * c + ux[j * nx + g.im(i)];
            let below = if j == 0 { -c } else { ux[(j - 1) * nx + i] };
            let above = if j == ny - 1 { -c } else { ux[(j + 1) * nx + i] };
            lx[j * nx + i] = xx * idx2 + (above - 2.0 * c + below) * idy2;
        }
    }
    let mut ly = vec![0.0; nx * (ny + 1)];
    for j in 1..ny {
        for i in 0..nx {
            let c = uy[j * nx + i];
            let xx = uy[j * nx + g.ip(i)] - 2.0 * c + uy[j * nx + g.im(i)];
            let yy = uy[(j + 1) * nx + i] - 2.0 * c + uy[(j - 1) * nx + i];
            ly[j * nx + i] = xx * idx2 + yy * idy2;
        }
    }
    VelocityField::from_parts(g, lx, ly, f.bc()).expect("shape by construction")
}

/// Five-point Laplacian of a node field at interior nodes; wall rows are zero.
pub fn node_laplacian(psi: &ScalarField) -> Result<ScalarField> {
    if psi.location() != Location::Node {
        return Err(LabError::shape("node_laplacian expects a node scalar"));
    }
    let g = *psi.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (idx2, idy2) = (1.0 / (g.dx() * g.dx()), 1.0 / (g.dy() * g.dy()));
    let v = psi.values();
    let mut out = vec![0.0; nx * (ny + 1)];
    for j in 1..ny {
        for i in 0..nx {
            let c = v[j * nx + i];
            out[j * nx + i] = (v[j * nx + g.ip(i)] - 2.0 * c + v[j * nx + g.im(i)]) * idx2
                + (v[(j + 1) * nx + i] - 2.0 * c + v[(j - 1) * nx + i]) * idy2;
        }
    }
    ScalarField::from_values(g, Location::Node, out)
}

/// Pointwise velocity gradient tensor at cell centers,
/// `[d_x ux, d_y ux, d_x uy, d_y uy]` per cell.
///
/// Off-diagonal entries use centered differences averaged to the cell center;
/// in the wall-adjacent rows `d_y ux` uses the one-sided second-order stencil
/// `(-3 u0 + 4 u1 - u2) / (2 dy)` evaluated on the wall side.
pub fn center_gradient(f: &VelocityField) -> Vec<[f64; 4]> {
    let g = *f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (dx, dy) = (g.dx(), g.dy());
    let (ux, uy) = (f.ux(), f.uy());
    let dyux_row = |i: usize, j: usize| -> f64 {
        if j == 0 {
            (-3.0 * ux[i] + 4.0 * ux[nx + i] - ux[2 * nx + i]) / (2.0 * dy)
        } else if j == ny - 1 {
            (3.0 * ux[j * nx + i] - 4.0 * ux[(j - 1) * nx + i] + ux[(j - 2) * nx + i]) / (2.0 * dy)
        } else {
            (ux[(j + 1) * nx + i] - ux[(j - 1) * nx + i]) / (2.0 * dy)
        }
    };
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let ip = g.ip(i);
            let im = g.im(i);
            let dxux = (ux[j * nx + ip] - ux[j * nx + i]) / dx;
            let dyuy = (uy[(j + 1) * nx + i] - uy[j * nx + i]) / dy;
            let dyux = 0.5 * (dyux_row(i, j) + dyux_row(ip, j));
            let dxuy_at = |row: usize| (uy[row * nx + ip] - uy[row * nx + im]) / (2.0 * dx);
            let dxuy = 0.5 * (dxuy_at(j) + dxuy_at(j + 1));
            out.push([dxux, dyux, dxuy, dyuy]);
        }
    }
    out
}

/// Velocity averaged to cell centers, `(ux, uy)` per cell.
pub fn center_velocity(f: &VelocityField) -> Vec<(f64, f64)> {
    let g = *f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (ux, uy) = (f.ux(), f.uy());
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push((
                0.5 * (ux[j * nx + i] + ux[j * nx + g.ip(i)]),
                0.5 * (uy[j * nx + i] + uy[(j + 1) * nx + i]),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::grid::Grid;
    use std::f64::consts::PI;

    fn g(n: usize) -> Grid {
        Grid::unit(n).unwrap()
    }

    #[test]
    fn divergence_of_uniform_field_is_zero() {
        let f = VelocityField::from_fn(g(16), BoundaryKind::Free, |_, _| (1.3, -0.7));
        assert!(divergence(&f).max_abs() < 1e-12);
        let z = VelocityField::zeros(g(16), BoundaryKind::Free);
        assert_eq!(divergence(&z).max_abs(), 0.0);
    }

    #[test]
    fn rot_is_divergence_free_to_roundoff() {
        let psi = ScalarField::from_fn(g(24), Location::Node, |x, y| {
            (2.0 * PI * x).sin() * (PI * y).sin().powi(2) + 0.3 * (x * y).cos()
        });
        let u = rot(&psi).unwrap();
        assert!(divergence(&u).max_abs() < 1e-11);
    }

    fn sampled_rot(n: usize, profile: impl Fn(f64) -> (f64, f64)) -> VelocityField {
        // analytic rot of psi = sin(2 pi x) P(y) sampled pointwise; profile returns (P, P')
        VelocityField::from_fn(g(n), BoundaryKind::Free, |x, y| {
            let (p, dp) = profile(y);
            ((2.0 * PI * x).sin() * dp, -2.0 * PI * (2.0 * PI * x).cos() * p)
        })
    }

    #[test]
    fn sampled_rot_of_sine_squared_profile_is_nearly_solenoidal() {
        let sin2 = |y: f64| ((PI * y).sin().powi(2), PI * (2.0 * PI * y).sin());
        let e64 = divergence(&sampled_rot(64, sin2)).max_abs();
        assert!(e64 <= 1e-3, "max div at 64^2 = {e64}");
    }

    #[test]
    fn sampled_rot_divergence_converges_at_second_order() {
        // sin^2(pi y) shares its frequency with sin(2 pi x), which makes the
        // two difference quotients cancel exactly; a polynomial profile
        // exposes the truncation error
        let poly = |y: f64| (y * y * (1.0 - y).powi(2), 2.0 * y * (1.0 - y) * (1.0 - 2.0 * y));
        let e64 = divergence(&sampled_rot(64, poly)).max_abs();
        let e128 = divergence(&sampled_rot(128, poly)).max_abs();
        assert!(e64 <= 1e-3, "max div at 64^2 = {e64}");
        let rate = (e64 / e128).log2();
        assert!((rate - 2.0).abs() < 0.2, "rate {rate}");
    }

    #[test]
    fn gradient_is_negative_adjoint_of_divergence() {
        let grid = Grid::new(12, 10, 1.7).unwrap();
        let p = ScalarField::from_fn(grid, Location::Center, |x, y| (3.0 * x).sin() + y * y * x);
        let u = VelocityField::from_fn(grid, BoundaryKind::NoPenetration, |x, y| {
            ((5.0 * y).cos() * x, (2.0 * x).sin() * y * (1.0 - y))
        });
        let lhs = gradient(&p).unwrap().dot(&u).unwrap();
        let d = divergence(&u);
        let rhs: f64 = -p.values().iter().zip(d.values()).map(|(a, b)| a * b).sum::<f64>()
            * grid.cell_area();
        assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn curl_of_rot_matches_node_laplacian_inside() {
        let grid = g(16);
        let psi = ScalarField::from_fn(grid, Location::Node, |x, y| (2.0 * PI * x).cos() * (y * (1.0 - y)).powi(2));
        let w = curl(&rot(&psi).unwrap());
        let lap = node_laplacian(&psi).unwrap();
        for j in 1..16 {
            for i in 0..16 {
                assert!((w.get(i, j) + lap.get(i, j)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn laplacian_energy_identity_holds_by_parts() {
        let grid = Grid::new(10, 12, 1.3).unwrap();
        let u = VelocityField::from_fn(grid, BoundaryKind::NoSlip, |x, y| {
            ((4.0 * x).sin() + y, (x * 7.0).cos() * y * (1.0 - y))
        });
        let lhs = -vector_laplacian(&u).dot(&u).unwrap();
        let h1 = crate::fields::norms::h1_seminorm(&u);
        assert!((lhs - h1 * h1).abs() < 1e-11 * lhs.abs());
    }
}
