use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Channel height; the walls sit at `y = 0` and `y = CHANNEL_HEIGHT`.
pub const CHANNEL_HEIGHT: f64 = 1.0;

/// Uniform grid on the periodic channel `[0, Lx) x [0, 1]`.
///
/// The x direction is periodic with `nx` cells; the y direction is
/// wall-bounded with `ny` cells. Staggered locations:
///
/// * cell centers `((i + 1/2) dx, (j + 1/2) dy)`, `nx x ny`
/// * vertical faces (x-velocity) `(i dx, (j + 1/2) dy)`, `nx x ny`
/// * horizontal faces (y-velocity) `((i + 1/2) dx, j dy)`, `nx x (ny + 1)`
/// * nodes (stream function, vorticity) `(i dx, j dy)`, `nx x (ny + 1)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    nx: usize,
    ny: usize,
    length_x: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, length_x: f64) -> Result<Self> {
        if nx < 8 || ny < 8 {
            return Err(LabError::config(format!(
                "grid needs at least 8 cells per direction, got {nx} x {ny}"
            )));
        }
        if !(length_x.is_finite() && length_x > 0.0) {
            return Err(LabError::config(format!(
                "channel length must be positive, got {length_x}"
            )));
        }
        Ok(Self { nx, ny, length_x })
    }

    /// Square-cell-count grid on a unit channel.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, n, 1.0)
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn length_x(&self) -> f64 {
        self.length_x
    }

    #[inline]
    pub fn height(&self) -> f64 {
        CHANNEL_HEIGHT
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.length_x / self.nx as f64
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        CHANNEL_HEIGHT / self.ny as f64
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn area(&self) -> f64 {
        self.length_x * CHANNEL_HEIGHT
    }

    #[inline]
    pub fn min_spacing(&self) -> f64 {
        self.dx().min(self.dy())
    }

    #[inline]
    pub fn x_face(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    #[inline]
    pub fn x_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx()
    }

    #[inline]
    pub fn y_node(&self, j: usize) -> f64 {
        if j == self.ny {
            CHANNEL_HEIGHT
        } else {
            j as f64 * self.dy()
        }
    }

    #[inline]
    pub fn y_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dy()
    }

    /// Periodic successor in x.
    #[inline]
    pub fn ip(&self, i: usize) -> usize {
        if i + 1 == self.nx {
            0
        } else {
            i + 1
        }
    }

    /// Periodic predecessor in x.
    #[inline]
    pub fn im(&self, i: usize) -> usize {
        if i == 0 {
            self.nx - 1
        } else {
            i - 1
        }
    }

    /// Largest x wavenumber that is resolved without aliasing.
    pub fn nyquist_x(&self) -> usize {
        self.nx / 2
    }

    pub(crate) fn ensure_same(&self, other: &Grid, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(LabError::shape(format!(
                "{what}: grids differ ({}x{} Lx={} vs {}x{} Lx={})",
                self.nx, self.ny, self.length_x, other.nx, other.ny, other.length_x
            )))
        }
    }
}

/// Distance to the nearest wall, `rho(y) = min(y, 1 - y)`.
#[inline]
pub fn wall_distance(y: f64) -> f64 {
    y.min(CHANNEL_HEIGHT - y).max(0.0)
}
