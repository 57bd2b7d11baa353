//! Dense and brute-force oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use inviscid_lab::fields::{h1_seminorm, l2_norm, trilinear_form, BoundaryKind, Grid, VelocityField};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_field(grid: Grid, seed: u64, bc: BoundaryKind) -> VelocityField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ux = (0..grid.nx() * grid.ny()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let uy = (0..grid.nx() * (grid.ny() + 1)).map(|_| rng.random_range(-1.0..1.0)).collect();
    VelocityField::from_parts(grid, ux, uy, bc).unwrap()
}

/// Minimizes `|u - f|^2` subject to `D u = 0` through the bordered KKT system
/// `[[I, D^T, 0], [D, 0, 1], [0, 1^T, 0]]`. Unknowns are `ux` and the interior
/// rows of `uy`; the quadrature weight is uniform on them.
pub fn kkt_projection(f: &VelocityField) -> VelocityField {
    let g = *f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (dx, dy) = (g.dx(), g.dy());
    let n_x = nx * ny;
    let n_y = nx * (ny - 1);
    let n_u = n_x + n_y;
    let n_p = nx * ny;
    let size = n_u + n_p + 1;
    let ix = |i: usize, j: usize| j * nx + i;
    let iy = |i: usize, j: usize| n_x + (j - 1) * nx + i;

    let mut k = DMatrix::<f64>::zeros(size, size);
    let mut rhs = DVector::<f64>::zeros(size);
    for r in 0..n_u {
        k[(r, r)] = 1.0;
    }
    for j in 0..ny {
        for i in 0..nx {
            rhs[ix(i, j)] = f.ux_at(i, j);
            if j > 0 {
                rhs[iy(i, j)] = f.uy_at(i, j);
            }
        }
    }
    for j in 0..ny {
        for i in 0..nx {
            let row = n_u + j * nx + i;
            let mut entries = vec![(ix((i + 1) % nx, j), 1.0 / dx), (ix(i, j), -1.0 / dx)];
            if j + 1 < ny {
                entries.push((iy(i, j + 1), 1.0 / dy));
            }
            if j > 0 {
                entries.push((iy(i, j), -1.0 / dy));
            }
            for (col, v) in entries {
                k[(row, col)] += v;
                k[(col, row)] += v;
            }
            k[(row, size - 1)] = 1.0;
            k[(size - 1, row)] = 1.0;
        }
    }
    let sol = k.lu().solve(&rhs).expect("KKT system is regular");
    let ux = (0..n_x).map(|r| sol[r]).collect();
    let mut uy = vec![0.0; nx * (ny + 1)];
    for j in 1..ny {
        for i in 0..nx {
            uy[j * nx + i] = sol[iy(i, j)];
        }
    }
    VelocityField::from_parts(g, ux, uy, BoundaryKind::NoPenetration).unwrap()
}

/// `b(a, b, c)` assembled face by face: each interior face flux leaves one
/// control volume and enters its neighbour; wall faces carry no momentum.
pub fn brute_force_trilinear(a: &VelocityField, b: &VelocityField, c: &VelocityField) -> f64 {
    let g = *a.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (dx, dy) = (g.dx(), g.dy());
    let ax = |i: usize, j: usize| a.ux_at(i % nx, j);
    let ay = |i: usize, j: usize| a.uy_at(i % nx, j);
    let bx = |i: usize, j: usize| b.ux_at(i % nx, j);
    let by = |i: usize, j: usize| if j == 0 || j == ny { 0.0 } else { b.uy_at(i % nx, j) };

    let mut net_x = vec![vec![0.0; nx]; ny];
    for j in 0..ny {
        for i in 0..nx {
            // face at cell center (i + 1/2, j + 1/2) between x-volumes i and i + 1
            let flux = 0.5 * (ax(i, j) + ax(i + 1, j)) * dy * 0.5 * (bx(i, j) + bx(i + 1, j));
            net_x[j][i] += flux;
            net_x[j][(i + 1) % nx] -= flux;
        }
    }
    for j in 0..ny - 1 {
        for i in 0..nx {
            // face at node (i, j + 1) between x-volumes rows j and j + 1
            let flux = 0.5 * (ay(i + nx - 1, j + 1) + ay(i, j + 1)) * dx * 0.5 * (bx(i, j) + bx(i, j + 1));
            net_x[j][i] += flux;
            net_x[j + 1][i] -= flux;
        }
    }

    let mut net_y = vec![vec![0.0; nx]; ny + 1];
    for j in 1..ny {
        for i in 0..nx {
            // face at node (i + 1, j) between y-volumes i and i + 1
            let flux = 0.5 * (ax(i + 1, j - 1) + ax(i + 1, j)) * dy * 0.5 * (by(i, j) + by(i + 1, j));
            net_y[j][i] += flux;
            net_y[j][(i + 1) % nx] -= flux;
        }
    }
    for j in 0..ny {
        for i in 0..nx {
            // face at cell center row j between y-volumes rows j and j + 1
            let flux = 0.5 * (ay(i, j) + ay(i, j + 1)) * dx * 0.5 * (by(i, j) + by(i, j + 1));
            if j >= 1 {
                net_y[j][i] += flux;
            }
            if j + 1 < ny {
                net_y[j + 1][i] -= flux;
            }
        }
    }

    let mut sum = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            sum += c.ux_at(i, j) * net_x[j][i];
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            sum += c.uy_at(i, j) * net_y[j][i];
        }
    }
    sum
}

/// Exactly divergence-free velocity of `psi = sin^2(pi y) (cos(2 pi x) + 0.3 sin(4 pi x))`,
/// sampled pointwise so that its discrete divergence is only `O(h^2)`.
pub fn analytic_advector(grid: Grid) -> VelocityField {
    VelocityField::from_fn(grid, BoundaryKind::NoPenetration, |x, y| {
        let s2 = (PI * y).sin().powi(2);
        let ds2 = PI * (2.0 * PI * y).sin();
        let h = (2.0 * PI * x).cos() + 0.3 * (4.0 * PI * x).sin();
        let dh = -2.0 * PI * (2.0 * PI * x).sin() + 1.2 * PI * (4.0 * PI * x).cos();
        (ds2 * h, -s2 * dh)
    })
}

/// Velocity of `psi = y sin^2(pi y) (sin(2 pi x) + cos(4 pi x) + 0.2)`; the factor
/// `y` breaks the mirror symmetry that would make the defect vanish identically.
pub fn analytic_transported(grid: Grid) -> VelocityField {
    VelocityField::from_fn(grid, BoundaryKind::NoSlip, |x, y| {
        let s = y * (PI * y).sin().powi(2);
        let ds = (PI * y).sin().powi(2) + PI * y * (2.0 * PI * y).sin();
        let h = (2.0 * PI * x).sin() + (4.0 * PI * x).cos() + 0.2;
        let dh = 2.0 * PI * (2.0 * PI * x).cos() - 4.0 * PI * (4.0 * PI * x).sin();
        (ds * h, -s * dh)
    })
}

/// `|b(a, w, w)| / (|a| |grad w| |w|)` for the sampled fields on an `n x n` grid.
pub fn skewness_defect(n: usize) -> f64 {
    let g = Grid::unit(n).unwrap();
    let a = analytic_advector(g);
    let w = analytic_transported(g);
    trilinear_form(&a, &w, &w).unwrap().abs() / (l2_norm(&a) * h1_seminorm(&w) * l2_norm(&w))
}
