//! Vorticity-stream function integrator for the 2D Euler equations in the
//! channel.
//!
//! `d_t w = J(psi, w) + curl f` with `lap psi = -w`, `psi = 0` on the walls
//! and `u = rot psi`, so `u . grad w = -J(psi, w)`. `J` is Arakawa's average
//! of the three second-order Jacobians; with `psi` vanishing on the walls
//! `sum psi J(psi, w) = 0`, so the semi-discrete kinetic energy
//! `sum psi w dx dy = |u|^2` is conserved exactly and the explicit midpoint
//! rule only adds an `O(dt^2)` drift over a fixed horizon.
//!
//! The wall rows of `w` do not enter the energy; they are carried by the
//! tangential transport `d_t w = -u_wall d_x w + curl f`, with the
//! second-order one-sided wall velocity `u_wall = d_y psi`.

use serde::{Deserialize, Serialize};

use super::forcing::ForcingSpec;
use super::ns::{courant, DEFAULT_CFL};
use crate::error::{LabError, Result};
use crate::fields::{
    l2_norm, node_laplacian, rot, BoundaryKind, Grid, Location, ScalarField, SeparableSolver,
    SolveMethod, VelocityField, WallClosure,
};

/// Euler state: node vorticity, node stream function and the staggered
/// velocity `rot psi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerState {
    pub time: f64,
    pub vorticity: ScalarField,
    pub stream: ScalarField,
    pub velocity: VelocityField,
}

impl EulerState {
    /// Kinetic energy `|u|^2`.
    pub fn energy(&self) -> f64 {
        l2_norm(&self.velocity).powi(2)
    }
}

/// Reusable Euler integrator holding the stream-function Poisson solver.
#[derive(Debug, Clone)]
pub struct EulerStepper {
    grid: Grid,
    cfl_limit: f64,
    poisson: SeparableSolver,
}

impl EulerStepper {
    pub fn new(grid: Grid, method: SolveMethod) -> Result<Self> {
        Ok(Self {
            grid,
            cfl_limit: DEFAULT_CFL,
            poisson: SeparableSolver::poisson(grid, WallClosure::NodeDirichlet, method)?,
        })
    }

    pub fn with_cfl_limit(mut self, limit: f64) -> Self {
        self.cfl_limit = limit;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// State from a stream function. Wall rows of `psi` must vanish; interior
    /// vorticity is `-lap_h psi` and the wall vorticity is the one-sided
    /// second-order `-d_yy psi`.
    pub fn from_stream(&self, psi: &ScalarField, time: f64) -> Result<EulerState> {
        if psi.location() != Location::Node {
            return Err(LabError::shape("stream function must live on nodes"));
        }
        self.grid.ensure_same(psi.grid(), "euler state")?;
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let wall = psi.row(0).iter().chain(psi.row(ny)).fold(0.0f64, |m, v| m.max(v.abs()));
        if wall > 1e-12 * (1.0 + psi.max_abs()) {
            return Err(LabError::InvalidInput(format!(
                "stream function must vanish on the walls (max wall value {wall:e})"
            )));
        }
        let mut psi = psi.clone();
        for i in 0..nx {
            psi.set(i, 0, 0.0);
            psi.set(i, ny, 0.0);
        }
        let mut w = node_laplacian(&psi)?.scaled(-1.0);
        let idy2 = 1.0 / (self.grid.dy() * self.grid.dy());
        for i in 0..nx {
            let p = |j: usize| psi.get(i, j);
            w.set(i, 0, -(2.0 * p(0) - 5.0 * p(1) + 4.0 * p(2) - p(3)) * idy2);
            w.set(
                i,
                ny,
                -(2.0 * p(ny) - 5.0 * p(ny - 1) + 4.0 * p(ny - 2) - p(ny - 3)) * idy2,
            );
        }
        self.assemble(time, w, psi)
    }

    /// State from a full node vorticity (wall rows included).
    pub fn from_vorticity(&self, w: &ScalarField, time: f64) -> Result<EulerState> {
        if w.location() != Location::Node {
            return Err(LabError::shape("vorticity must live on nodes"));
        }
        self.grid.ensure_same(w.grid(), "euler state")?;
        let psi = self.solve_stream(w)?;
        self.assemble(time, w.clone(), psi)
    }

    fn assemble(&self, time: f64, vorticity: ScalarField, stream: ScalarField) -> Result<EulerState> {
        let velocity = rot(&stream)?.with_bc(BoundaryKind::NoPenetration);
        Ok(EulerState {
            time,
            vorticity,
            stream,
            velocity,
        })
    }

    /// Solves `lap psi = -w` at interior nodes with `psi = 0` on the walls.
    pub fn solve_stream(&self, w: &ScalarField) -> Result<ScalarField> {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let rhs: Vec<f64> = w.values()[nx..ny * nx].iter().map(|v| -v).collect();
        let (inner, _) = self.poisson.solve(&rhs)?;
        let mut psi = vec![0.0; nx * (ny + 1)];
        psi[nx..ny * nx].copy_from_slice(&inner);
        ScalarField::from_values(self.grid, Location::Node, psi)
    }

    /// Time derivative of the vorticity.
    fn rate(&self, w: &ScalarField, psi: &ScalarField, curl_f: Option<&ScalarField>) -> ScalarField {
        let g = self.grid;
        let (nx, ny) = (g.nx(), g.ny());
        let mut out = arakawa_jacobian(psi, w);
        let (dx, dy) = (g.dx(), g.dy());
        for i in 0..nx {
            let (ip, im) = (g.ip(i), g.im(i));
            let u_bottom = (4.0 * psi.get(i, 1) - psi.get(i, 2) - 3.0 * psi.get(i, 0)) / (2.0 * dy);
            let u_top = (3.0 * psi.get(i, ny) - 4.0 * psi.get(i, ny - 1) + psi.get(i, ny - 2)) / (2.0 * dy);
            out.set(i, 0, -u_bottom * (w.get(ip, 0) - w.get(im, 0)) / (2.0 * dx));
            out.set(i, ny, -u_top * (w.get(ip, ny) - w.get(im, ny)) / (2.0 * dx));
        }
        if let Some(c) = curl_f {
            for (o, v) in out.values_mut().iter_mut().zip(c.values()) {
                *o += v;
            }
        }
        out
    }

    /// Explicit midpoint step of length `dt`; negative `dt` integrates backward.
    pub fn step(&self, state: &EulerState, dt: f64, forcing: &ForcingSpec) -> Result<EulerState> {
        self.grid.ensure_same(state.vorticity.grid(), "euler step")?;
        let c = courant(&state.velocity, dt);
        if !(c <= self.cfl_limit) {
            return Err(LabError::StepSize {
                courant: c,
                limit: self.cfl_limit,
            });
        }
        let f0 = forcing.eval_curl(state.time)?;
        let k1 = self.rate(&state.vorticity, &state.stream, f0.as_ref());
        let w_mid = state.vorticity.axpy(0.5 * dt, &k1)?;
        let psi_mid = self.solve_stream(&w_mid)?;
        let fm = forcing.eval_curl(state.time + 0.5 * dt)?;
        let k2 = self.rate(&w_mid, &psi_mid, fm.as_ref());
        let w = state.vorticity.axpy(dt, &k2)?;
        let psi = self.solve_stream(&w)?;
        let next = self.assemble(state.time + dt, w, psi)?;
        if !next.velocity.is_finite() {
            return Err(LabError::Numerical(format!(
                "non-finite vorticity at t = {}",
                next.time
            )));
        }
        Ok(next)
    }
}

/// Arakawa's energy- and enstrophy-consistent Jacobian
/// `J(psi, w) = d_x psi d_y w - d_y psi d_x w` at interior nodes; wall rows
/// of the result are zero.
pub fn arakawa_jacobian(psi: &ScalarField, w: &ScalarField) -> ScalarField {
    let g = *psi.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let s = 1.0 / (12.0 * g.dx() * g.dy());
    let p = psi.values();
    let q = w.values();
    let mut out = vec![0.0; nx * (ny + 1)];
    for j in 1..ny {
        for i in 0..nx {
            let (ip, im) = (g.ip(i), g.im(i));
            let at = |v: &[f64], a: usize, b: usize| v[b * nx + a];
            let jpp = (at(p, ip, j) - at(p, im, j)) * (at(q, i, j + 1) - at(q, i, j - 1))
                - (at(p, i, j + 1) - at(p, i, j - 1)) * (at(q, ip, j) - at(q, im, j));
            let jpx = at(p, ip, j) * (at(q, ip, j + 1) - at(q, ip, j - 1))
                - at(p, im, j) * (at(q, im, j + 1) - at(q, im, j - 1))
                - at(p, i, j + 1) * (at(q, ip, j + 1) - at(q, im, j + 1))
                + at(p, i, j - 1) * (at(q, ip, j - 1) - at(q, im, j - 1));
            let jxp = at(q, i, j + 1) * (at(p, ip, j + 1) - at(p, im, j + 1))
                - at(q, i, j - 1) * (at(p, ip, j - 1) - at(p, im, j - 1))
                - at(q, ip, j) * (at(p, ip, j + 1) - at(p, ip, j - 1))
                + at(q, im, j) * (at(p, im, j + 1) - at(p, im, j - 1));
            out[j * nx + i] = (jpp + jpx + jxp) * s;
        }
    }
    ScalarField::from_values(g, Location::Node, out).expect("shape by construction")
}

/// One Euler step with a freshly built stepper and direct solves.
pub fn euler_step(state: &EulerState, dt: f64, forcing: &ForcingSpec) -> Result<EulerState> {
    EulerStepper::new(*state.vorticity.grid(), SolveMethod::Direct)?.step(state, dt, forcing)
}
