//! Fractional-step integrator for the stochastic Navier-Stokes equations
//! with additive noise `nu^{1/2} sum_k sigma_k dW^k` and no-slip walls.
//!
//! One step from `u` with increments `dW`:
//!
//! 1. explicit conservative advection `u - dt A(u) u` (plus `dt f(t)`),
//! 2. implicit diffusion `(I - nu dt lap) u* = ...` with no-slip data,
//! 3. additive noise `u* + nu^{1/2} sum_k sigma_k dW^k`,
//! 4. Leray projection.

use serde::{Deserialize, Serialize};

use super::forcing::ForcingSpec;
use super::noise::NoiseModel;
use crate::error::{LabError, Result};
use crate::fields::{
    advection, BoundaryKind, Grid, Projector, SeparableSolver, SolveMethod, SolveStats, VelocityField,
    WallClosure,
};

pub const DEFAULT_CFL: f64 = 0.5;

/// Navier-Stokes state at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NsState {
    pub time: f64,
    pub velocity: VelocityField,
    pub nu: f64,
}

impl NsState {
    pub fn new(velocity: VelocityField, nu: f64) -> Result<Self> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(LabError::config(format!("viscosity must be nonnegative, got {nu}")));
        }
        Ok(Self {
            time: 0.0,
            velocity: velocity.with_bc(BoundaryKind::NoSlip),
            nu,
        })
    }
}

/// Largest Courant number `max|u| dt / min(dx, dy)` of a velocity sample set.
pub fn courant(u: &VelocityField, dt: f64) -> f64 {
    u.max_abs() * dt.abs() / u.grid().min_spacing()
}

#[derive(Debug, Clone)]
struct DiffusionSolvers {
    dt: f64,
    ux: SeparableSolver,
    uy: SeparableSolver,
}

/// Reusable stepper holding the projector and the implicit diffusion solvers.
#[derive(Debug, Clone)]
pub struct NsStepper {
    grid: Grid,
    nu: f64,
    cfl_limit: f64,
    method: SolveMethod,
    projector: Projector,
    diffusion: Vec<DiffusionSolvers>,
    last_stats: SolveStats,
}

impl NsStepper {
    pub fn new(grid: Grid, nu: f64, method: SolveMethod) -> Result<Self> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(LabError::config(format!("viscosity must be nonnegative, got {nu}")));
        }
        Ok(Self {
            grid,
            nu,
            cfl_limit: DEFAULT_CFL,
            method,
            projector: Projector::new(grid, method)?,
            diffusion: Vec::new(),
            last_stats: SolveStats::default(),
        })
    }

    pub fn with_cfl_limit(mut self, limit: f64) -> Self {
        self.cfl_limit = limit;
        self
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn cfl_limit(&self) -> f64 {
        self.cfl_limit
    }

    /// Metadata of the most recent pressure solve.
    pub fn last_stats(&self) -> SolveStats {
        self.last_stats
    }

    fn diffusion_for(&mut self, dt: f64) -> Result<&DiffusionSolvers> {
        if let Some(pos) = self.diffusion.iter().position(|d| d.dt == dt) {
            return Ok(&self.diffusion[pos]);
        }
        let b = -self.nu * dt;
        let solvers = DiffusionSolvers {
            dt,
            ux: SeparableSolver::new(self.grid, WallClosure::CenterDirichlet, 1.0, b, self.method)?,
            uy: SeparableSolver::new(self.grid, WallClosure::NodeDirichlet, 1.0, b, self.method)?,
        };
        // a run uses at most two distinct steps (regular and trailing)
        if self.diffusion.len() >= 4 {
            self.diffusion.remove(0);
        }
        self.diffusion.push(solvers);
        Ok(self.diffusion.last().expect("just pushed"))
    }

    /// Solves `(I - nu dt lap) u* = u` with no-slip data.
    pub fn diffuse(&mut self, u: &VelocityField, dt: f64) -> Result<VelocityField> {
        if self.nu == 0.0 {
            return Ok(u.clone());
        }
        let g = self.grid;
        let (nx, ny) = (g.nx(), g.ny());
        let solvers = self.diffusion_for(dt)?;
        let (ux, _) = solvers.ux.solve(u.ux())?;
        let (inner, _) = solvers.uy.solve(&u.uy()[nx..ny * nx])?;
        let mut uy = vec![0.0; nx * (ny + 1)];
        uy[nx..ny * nx].copy_from_slice(&inner);
        VelocityField::from_parts(g, ux, uy, BoundaryKind::NoSlip)
    }

    /// Advances `state` by `dt`. `dw` holds one Brownian increment per noise
    /// mode (empty for the deterministic equations).
    pub fn step(
        &mut self,
        state: &NsState,
        dt: f64,
        model: &NoiseModel,
        dw: &[f64],
        forcing: &ForcingSpec,
    ) -> Result<NsState> {
        self.grid.ensure_same(state.velocity.grid(), "navier-stokes step")?;
        if state.nu != self.nu {
            return Err(LabError::config(format!(
                "state viscosity {} differs from stepper viscosity {}",
                state.nu, self.nu
            )));
        }
        let c = courant(&state.velocity, dt);
        if !(c <= self.cfl_limit) {
            return Err(LabError::StepSize {
                courant: c,
                limit: self.cfl_limit,
            });
        }
        let u = &state.velocity;
        let mut work = u.axpy(-dt, &advection(u, u)?)?;
        if let Some(f) = forcing.eval(&self.grid, state.time)? {
            work.axpy_in_place(dt, &f)?;
        }
        let mut work = self.diffuse(&work, dt)?;
        if model.n_modes() > 0 && self.nu > 0.0 {
            work.axpy_in_place(self.nu.sqrt(), &model.combine(dw)?)?;
        }
        let (velocity, _, stats) = self.projector.project_with_pressure(&work)?;
        self.last_stats = stats;
        if !velocity.is_finite() {
            return Err(LabError::Numerical(format!(
                "non-finite velocity at t = {}",
                state.time + dt
            )));
        }
        Ok(NsState {
            time: state.time + dt,
            velocity,
            nu: self.nu,
        })
    }
}

/// One Navier-Stokes step with a freshly built stepper and direct solves.
pub fn ns_step(state: &NsState, dt: f64, model: &NoiseModel, dw: &[f64]) -> Result<NsState> {
    NsStepper::new(*state.velocity.grid(), state.nu, SolveMethod::Direct)?.step(
        state,
        dt,
        model,
        dw,
        &ForcingSpec::zero(),
    )
}
