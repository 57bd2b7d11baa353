//! Solvers for `(a + b L) x = r` where `L` is a five-point Laplacian that is
//! periodic in x and carries one of three wall closures in y.
//!
//! The direct path diagonalizes x with an FFT and solves one real tridiagonal
//! system per wavenumber. The iterative path is matrix-free conjugate
//! gradients on the same operator.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{LabError, Result};

/// Wall closure of the y part of the Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WallClosure {
    /// Cell-centered unknowns with homogeneous Neumann walls (`ny` rows).
    CenterNeumann,
    /// Cell-centered unknowns with the antisymmetric ghost `u[-1] = -u[0]`,
    /// i.e. zero Dirichlet data on the wall itself (`ny` rows).
    CenterDirichlet,
    /// Interior node rows `1..ny` with zero Dirichlet walls (`ny - 1` rows).
    NodeDirichlet,
}

impl WallClosure {
    pub fn rows(self, grid: &Grid) -> usize {
        match self {
            WallClosure::CenterNeumann | WallClosure::CenterDirichlet => grid.ny(),
            WallClosure::NodeDirichlet => grid.ny() - 1,
        }
    }

    fn end_diagonal(self) -> f64 {
        match self {
            WallClosure::CenterNeumann => -1.0,
            WallClosure::CenterDirichlet => -3.0,
            WallClosure::NodeDirichlet => -2.0,
        }
    }
}

/// Which algorithm a [`SeparableSolver`] uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveMethod {
    #[default]
    Direct,
    ConjugateGradient { tolerance: f64, max_iter: usize },
}

impl SolveMethod {
    pub const CG_TOLERANCE: f64 = 1e-10;

    pub fn cg(max_iter: usize) -> Self {
        SolveMethod::ConjugateGradient {
            tolerance: Self::CG_TOLERANCE,
            max_iter,
        }
    }
}

/// Outcome metadata of one solve.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Reusable solver for `(a + b L) x = r` on a fixed grid and closure.
#[derive(Clone)]
pub struct SeparableSolver {
    grid: Grid,
    closure: WallClosure,
    a: f64,
    b: f64,
    method: SolveMethod,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    lambda_x: Vec<f64>,
}

impl std::fmt::Debug for SeparableSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SeparableSolver")
            .field("grid", &self.grid)
            .field("closure", &self.closure)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("method", &self.method)
            .finish()
    }
}

impl SeparableSolver {
    pub fn new(grid: Grid, closure: WallClosure, a: f64, b: f64, method: SolveMethod) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || (a == 0.0 && b == 0.0) {
            return Err(LabError::InvalidInput(format!(
                "degenerate operator coefficients a = {a}, b = {b}"
            )));
        }
        let nx = grid.nx();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(nx);
        let inverse = planner.plan_fft_inverse(nx);
        let idx2 = 1.0 / (grid.dx() * grid.dx());
        let lambda_x = (0..nx)
            .map(|m| {
                let theta = 2.0 * std::f64::consts::PI * m as f64 / nx as f64;
                -(2.0 - 2.0 * theta.cos()) * idx2
            })
            .collect();
        Ok(Self {
            grid,
            closure,
            a,
            b,
            method,
            forward,
            inverse,
            lambda_x,
        })
    }

    /// Poisson operator `L` (a = 0, b = 1).
    pub fn poisson(grid: Grid, closure: WallClosure, method: SolveMethod) -> Result<Self> {
        Self::new(grid, closure, 0.0, 1.0, method)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn closure(&self) -> WallClosure {
        self.closure
    }

    pub fn method(&self) -> SolveMethod {
        self.method
    }

    /// True when the operator has the constants as null space.
    fn singular(&self) -> bool {
        self.a == 0.0 && self.closure == WallClosure::CenterNeumann
    }

    /// Applies `a + b L` to `x` (row-major, `nx x rows`).
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let nx = g.nx();
        let rows = self.closure.rows(g);
        let (idx2, idy2) = (1.0 / (g.dx() * g.dx()), 1.0 / (g.dy() * g.dy()));
        let mut out = vec![0.0; nx * rows];
        for j in 0..rows {
            for i in 0..nx {
                let c = x[j * nx + i];
                let xx = x[j * nx + g.ip(i)] - 2.0 * c + x[j * nx + g.im(i)];
                let below = if j > 0 {
                    x[(j - 1) * nx + i]
                } else {
                    self.ghost(c)
                };
                let above = if j + 1 < rows {
                    x[(j + 1) * nx + i]
                } else {
                    self.ghost(c)
                };
                out[j * nx + i] = self.a * c + self.b * (xx * idx2 + (above - 2.0 * c + below) * idy2);
            }
        }
        out
    }

    #[inline]
    fn ghost(&self, c: f64) -> f64 {
        match self.closure {
            WallClosure::CenterNeumann => c,
            WallClosure::CenterDirichlet => -c,
            WallClosure::NodeDirichlet => 0.0,
        }
    }

    /// Solves `(a + b L) x = r`. For the singular Neumann Poisson problem the
    /// mean of `r` is removed first and the returned `x` has zero mean.
    pub fn solve(&self, r: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        let nx = self.grid.nx();
        let rows = self.closure.rows(&self.grid);
        if r.len() != nx * rows {
            return Err(LabError::shape(format!(
                "right-hand side has {} values, solver expects {}",
                r.len(),
                nx * rows
            )));
        }
        let mut rhs = r.to_vec();
        if self.singular() {
            remove_mean(&mut rhs);
        }
        match self.method {
            SolveMethod::Direct => {
                let mut x = self.solve_direct(&rhs);
                if self.singular() {
                    remove_mean(&mut x);
                }
                let stats = SolveStats {
                    iterations: 1,
                    relative_residual: self.relative_residual(&x, &rhs),
                };
                Ok((x, stats))
            }
            SolveMethod::ConjugateGradient { tolerance, max_iter } => {
                self.solve_cg(&rhs, tolerance, max_iter)
            }
        }
    }

    fn relative_residual(&self, x: &[f64], r: &[f64]) -> f64 {
        let ax = self.apply(x);
        let num: f64 = ax.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum();
        let den: f64 = r.iter().map(|v| v * v).sum();
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    fn solve_direct(&self, r: &[f64]) -> Vec<f64> {
        let nx = self.grid.nx();
        let rows = self.closure.rows(&self.grid);
        let mut buf: Vec<Complex64> = r.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.forward.process(&mut buf);

        let idy2 = 1.0 / (self.grid.dy() * self.grid.dy());
        let end = self.closure.end_diagonal();
        let mut diag = vec![0.0; rows];
        let mut col = vec![Complex64::new(0.0, 0.0); rows];
        let mut cp = vec![0.0; rows];
        let off = self.b * idy2;
        for m in 0..nx {
            for j in 0..rows {
                let yd = if j == 0 || j + 1 == rows { end } else { -2.0 };
                diag[j] = self.a + self.b * (self.lambda_x[m] + yd * idy2);
                col[j] = buf[j * nx + m];
            }
            if rows == 1 {
                diag[0] = self.a + self.b * (self.lambda_x[m] + 2.0 * end * idy2);
            }
            let pinned = self.singular() && m == 0;
            if pinned {
                // constant null space: pin the first unknown, the mean is
                // removed by the caller
                col[0] = Complex64::new(0.0, 0.0);
            }
            thomas(&diag, off, &mut col, &mut cp, pinned);
            for j in 0..rows {
                buf[j * nx + m] = col[j];
            }
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / nx as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    fn solve_cg(&self, r: &[f64], tolerance: f64, max_iter: usize) -> Result<(Vec<f64>, SolveStats)> {
        // a + b L is negative definite for a <= 0 < b and positive definite
        // for the implicit diffusion operator; flip the sign so CG sees SPD
        let sign = if self.b > 0.0 && self.a <= 0.0 { -1.0 } else { 1.0 };
        let n = r.len();
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut x = vec![0.0; n];
        if rnorm == 0.0 {
            return Ok((
                x,
                SolveStats {
                    iterations: 0,
                    relative_residual: 0.0,
                },
            ));
        }
        let mut res: Vec<f64> = r.iter().map(|v| sign * v).collect();
        let mut p = res.clone();
        let mut rr: f64 = res.iter().map(|v| v * v).sum();
        for it in 1..=max_iter {
            let mut ap = self.apply(&p);
            ap.iter_mut().for_each(|v| *v *= sign);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if pap <= 0.0 {
                break;
            }
            let alpha = rr / pap;
            for k in 0..n {
                x[k] += alpha * p[k];
                res[k] -= alpha * ap[k];
            }
            if self.singular() {
                remove_mean(&mut res);
            }
            let rr_new: f64 = res.iter().map(|v| v * v).sum();
            let rel = rr_new.sqrt() / rnorm;
            if rel <= tolerance {
                if self.singular() {
                    remove_mean(&mut x);
                }
                return Ok((
                    x,
                    SolveStats {
                        iterations: it,
                        relative_residual: rel,
                    },
                ));
            }
            let beta = rr_new / rr;
            rr = rr_new;
            for k in 0..n {
                p[k] = res[k] + beta * p[k];
            }
        }
        Err(LabError::SolverNotConverged {
            iterations: max_iter,
            residual: rr.sqrt() / rnorm,
        })
    }
}

fn remove_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Thomas algorithm for a symmetric tridiagonal system with constant
/// off-diagonal `off`. With `pinned`, row 0 is replaced by `x0 = rhs0`.
fn thomas(diag: &[f64], off: f64, d: &mut [Complex64], cp: &mut [f64], pinned: bool) {
    let n = diag.len();
    let (b0, c0) = if pinned { (1.0, 0.0) } else { (diag[0], off) };
    cp[0] = c0 / b0;
    d[0] /= b0;
    for j in 1..n {
        let denom = diag[j] - off * cp[j - 1];
        cp[j] = off / denom;
        let prev = d[j - 1];
        d[j] = (d[j] - prev * off) / denom;
    }
    for j in (0..n - 1).rev() {
        let next = d[j + 1];
        d[j] -= next * cp[j];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rhs(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn direct_solves_every_closure() {
        let g = Grid::new(16, 12, 1.5).unwrap();
        for closure in [
            WallClosure::CenterNeumann,
            WallClosure::CenterDirichlet,
            WallClosure::NodeDirichlet,
        ] {
            for (a, b) in [(0.0, 1.0), (1.0, -0.01)] {
                let s = SeparableSolver::new(g, closure, a, b, SolveMethod::Direct).unwrap();
                let mut r = rhs(16 * closure.rows(&g), 7);
                if s.singular() {
                    remove_mean(&mut r);
                }
                let (x, st) = s.solve(&r).unwrap();
                assert!(st.relative_residual < 1e-12, "{closure:?} a={a}: {}", st.relative_residual);
                let ax = s.apply(&x);
                for (p, q) in ax.iter().zip(&r) {
                    assert!((p - q).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn cg_agrees_with_direct() {
        let g = Grid::unit(16).unwrap();
        let r = rhs(256, 3);
        let d = SeparableSolver::poisson(g, WallClosure::CenterNeumann, SolveMethod::Direct).unwrap();
        let c = SeparableSolver::poisson(g, WallClosure::CenterNeumann, SolveMethod::cg(2000)).unwrap();
        let (xd, _) = d.solve(&r).unwrap();
        let (xc, st) = c.solve(&r).unwrap();
        assert!(st.relative_residual <= 1e-10);
        let err = xd.iter().zip(&xc).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn cg_reports_non_convergence() {
        let g = Grid::unit(32).unwrap();
        let c = SeparableSolver::poisson(g, WallClosure::CenterNeumann, SolveMethod::cg(3)).unwrap();
        match c.solve(&rhs(1024, 5)) {
            Err(LabError::SolverNotConverged { iterations, residual }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-10);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
