use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{LabError, Result};

/// Boundary condition carried by a velocity field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// Both components vanish at the walls (viscous flow, noise modes).
    NoSlip,
    /// Only the wall-normal component vanishes (inviscid flow).
    NoPenetration,
    /// No constraint (raw fields before projection).
    Free,
}

/// Where a scalar field is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    /// Cell centers, `nx x ny` values.
    Center,
    /// Cell corners including both wall rows, `nx x (ny + 1)` values.
    Node,
}

impl Location {
    pub fn rows(self, grid: &Grid) -> usize {
        match self {
            Location::Center => grid.ny(),
            Location::Node => grid.ny() + 1,
        }
    }

    pub fn y(self, grid: &Grid, j: usize) -> f64 {
        match self {
            Location::Center => grid.y_center(j),
            Location::Node => grid.y_node(j),
        }
    }

    pub fn x(self, grid: &Grid, i: usize) -> f64 {
        match self {
            Location::Center => grid.x_center(i),
            Location::Node => grid.x_face(i),
        }
    }
}

/// Scalar samples on one of the staggered locations, row-major (`j * nx + i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    grid: Grid,
    location: Location,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid, location: Location) -> Self {
        let n = grid.nx() * location.rows(&grid);
        Self {
            grid,
            location,
            values: vec![0.0; n],
        }
    }

    pub fn from_values(grid: Grid, location: Location, values: Vec<f64>) -> Result<Self> {
        let n = grid.nx() * location.rows(&grid);
        if values.len() != n {
            return Err(LabError::shape(format!(
                "scalar field expects {n} values, got {}",
                values.len()
            )));
        }
        Ok(Self {
            grid,
            location,
            values,
        })
    }

    /// Samples `f(x, y)` at every location point.
    pub fn from_fn(grid: Grid, location: Location, f: impl Fn(f64, f64) -> f64) -> Self {
        let nx = grid.nx();
        let rows = location.rows(&grid);
        let mut values = Vec::with_capacity(nx * rows);
        for j in 0..rows {
            let y = location.y(&grid, j);
            for i in 0..nx {
                values.push(f(location.x(&grid, i), y));
            }
        }
        Self {
            grid,
            location,
            values,
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn location(&self) -> Location {
        self.location
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.location.rows(&self.grid)
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx() + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let nx = self.grid.nx();
        self.values[j * nx + i] = v;
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let nx = self.grid.nx();
        &self.values[j * nx..(j + 1) * nx]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &ScalarField) -> Result<Self> {
        self.conform(other)?;
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(out)
    }

    pub(crate) fn conform(&self, other: &ScalarField) -> Result<()> {
        self.grid.ensure_same(&other.grid, "scalar fields")?;
        if self.location != other.location {
            return Err(LabError::shape("scalar fields live on different locations"));
        }
        Ok(())
    }
}

/// Staggered velocity field.
///
/// `ux` lives on vertical faces `(i dx, (j + 1/2) dy)`, `nx x ny` values;
/// `uy` lives on horizontal faces `((i + 1/2) dx, j dy)`, `nx x (ny + 1)`
/// values where rows `0` and `ny` are the walls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityField {
    grid: Grid,
    ux: Vec<f64>,
    uy: Vec<f64>,
    bc: BoundaryKind,
}

impl VelocityField {
    pub fn zeros(grid: Grid, bc: BoundaryKind) -> Self {
        let nx = grid.nx();
        let ny = grid.ny();
        Self {
            grid,
            ux: vec![0.0; nx * ny],
            uy: vec![0.0; nx * (ny + 1)],
            bc,
        }
    }

    pub fn from_parts(grid: Grid, ux: Vec<f64>, uy: Vec<f64>, bc: BoundaryKind) -> Result<Self> {
        let nx = grid.nx();
        let ny = grid.ny();
        if ux.len() != nx * ny || uy.len() != nx * (ny + 1) {
            return Err(LabError::shape(format!(
                "velocity field on {nx}x{ny} expects {} + {} values, got {} + {}",
                nx * ny,
                nx * (ny + 1),
                ux.len(),
                uy.len()
            )));
        }
        let mut out = Self { grid, ux, uy, bc };
        out.enforce_bc();
        Ok(out)
    }

    /// Samples an analytic vector field at the staggered locations.
    pub fn from_fn(grid: Grid, bc: BoundaryKind, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let nx = grid.nx();
        let ny = grid.ny();
        let mut ux = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let y = grid.y_center(j);
            for i in 0..nx {
                ux.push(f(grid.x_face(i), y).0);
            }
        }
        let mut uy = Vec::with_capacity(nx * (ny + 1));
        for j in 0..=ny {
            let y = grid.y_node(j);
            for i in 0..nx {
                uy.push(f(grid.x_center(i), y).1);
            }
        }
        let mut out = Self { grid, ux, uy, bc };
        out.enforce_bc();
        out
    }

    /// Zeroes the wall rows of `uy` unless the field is tagged [`BoundaryKind::Free`].
    ///
    /// Tangential no-slip data lives half a cell from the wall and is imposed
    /// through the diffusion operator, not stored.
    pub fn enforce_bc(&mut self) {
        if self.bc != BoundaryKind::Free {
            let nx = self.grid.nx();
            let ny = self.grid.ny();
            self.uy[..nx].iter_mut().for_each(|v| *v = 0.0);
            self.uy[ny * nx..].iter_mut().for_each(|v| *v = 0.0);
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn bc(&self) -> BoundaryKind {
        self.bc
    }

    pub fn with_bc(mut self, bc: BoundaryKind) -> Self {
        self.bc = bc;
        self.enforce_bc();
        self
    }

    #[inline]
    pub fn ux(&self) -> &[f64] {
        &self.ux
    }

    #[inline]
    pub fn uy(&self) -> &[f64] {
        &self.uy
    }

    #[inline]
    pub fn ux_mut(&mut self) -> &mut [f64] {
        &mut self.ux
    }

    #[inline]
    pub fn uy_mut(&mut self) -> &mut [f64] {
        &mut self.uy
    }

    #[inline]
    pub fn ux_at(&self, i: usize, j: usize) -> f64 {
        self.ux[j * self.grid.nx() + i]
    }

    #[inline]
    pub fn uy_at(&self, i: usize, j: usize) -> f64 {
        self.uy[j * self.grid.nx() + i]
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.ux, self.uy)
    }

    pub fn is_zero(&self) -> bool {
        self.ux.iter().chain(&self.uy).all(|v| *v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.ux.iter().chain(&self.uy).all(|v| v.is_finite())
    }

    /// Largest absolute sample of either component.
    pub fn max_abs(&self) -> f64 {
        self.ux
            .iter()
            .chain(&self.uy)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute wall-normal sample on the two walls.
    pub fn wall_normal_max(&self) -> f64 {
        let nx = self.grid.nx();
        let ny = self.grid.ny();
        self.uy[..nx]
            .iter()
            .chain(&self.uy[ny * nx..])
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.scale_in_place(c);
        out
    }

    pub fn scale_in_place(&mut self, c: f64) {
        self.ux.iter_mut().chain(self.uy.iter_mut()).for_each(|v| *v *= c);
    }

    /// `self += c * other`.
    pub fn axpy_in_place(&mut self, c: f64, other: &VelocityField) -> Result<()> {
        self.grid.ensure_same(&other.grid, "velocity fields")?;
        for (a, b) in self.ux.iter_mut().zip(&other.ux) {
            *a += c * b;
        }
        for (a, b) in self.uy.iter_mut().zip(&other.uy) {
            *a += c * b;
        }
        Ok(())
    }

    /// `self + c * other`, keeping the boundary tag of `self`.
    pub fn axpy(&self, c: f64, other: &VelocityField) -> Result<Self> {
        let mut out = self.clone();
        out.axpy_in_place(c, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &VelocityField) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Quadrature inner product: weight `dx dy` on every `ux` sample and on
    /// interior `uy` rows, `dx dy / 2` on the two wall rows of `uy`.
    pub fn dot(&self, other: &VelocityField) -> Result<f64> {
        self.grid.ensure_same(&other.grid, "velocity fields")?;
        Ok(self.dot_unchecked(other))
    }

    pub(crate) fn dot_unchecked(&self, other: &VelocityField) -> f64 {
        let nx = self.grid.nx();
        let ny = self.grid.ny();
        let sx: f64 = self.ux.iter().zip(&other.ux).map(|(a, b)| a * b).sum();
        let mut sy_interior = 0.0;
        for k in nx..ny * nx {
            sy_interior += self.uy[k] * other.uy[k];
        }
        let mut sy_wall = 0.0;
        for k in (0..nx).chain(ny * nx..(ny + 1) * nx) {
            sy_wall += self.uy[k] * other.uy[k];
        }
        self.grid.cell_area() * (sx + sy_interior + 0.5 * sy_wall)
    }
}
