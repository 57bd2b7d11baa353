use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::fields::{l2_norm, rot, BoundaryKind, Grid, Location, ScalarField, VelocityField};

/// Wall profile of the noise stream functions, `sin^2(pi y)`, together with
/// its first derivative. Both vanish at `y = 0` and `y = 1`.
pub fn noise_profile(y: f64) -> (f64, f64) {
    let s = (PI * y).sin();
    (s * s, PI * (2.0 * PI * y).sin())
}

/// x-wavenumber and parity of mode `k`: modes come in (sin, cos) pairs with
/// wavenumbers 1, 1, 2, 2, ...
pub fn mode_wavenumber(k: usize) -> (usize, bool) {
    (k / 2 + 1, k.is_multiple_of(2))
}

/// The spatial noise profiles `sigma_k` and the master seed of the Brownian
/// motions driving them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseModel {
    grid: Grid,
    modes: Vec<VelocityField>,
    /// Nominal `|sigma_k|`, exactly 1 for the normalized modes.
    mode_norms: Vec<f64>,
    seed: u64,
}

impl NoiseModel {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[VelocityField] {
        &self.modes
    }

    pub fn mode_norms(&self) -> &[f64] {
        &self.mode_norms
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// `sum_k |sigma_k|^2`.
    pub fn total_intensity(&self) -> f64 {
        self.mode_norms.iter().map(|n| n * n).sum()
    }

    /// `sum_k sigma_k dw[k]`.
    pub fn combine(&self, dw: &[f64]) -> Result<VelocityField> {
        if dw.len() != self.modes.len() {
            return Err(LabError::shape(format!(
                "{} increments for {} noise modes",
                dw.len(),
                self.modes.len()
            )));
        }
        let mut out = VelocityField::zeros(self.grid, BoundaryKind::NoSlip);
        for (m, w) in self.modes.iter().zip(dw) {
            out.axpy_in_place(*w, m)?;
        }
        Ok(out)
    }

    /// `<u, sigma_k>` for every mode.
    pub fn projections(&self, u: &VelocityField) -> Result<Vec<f64>> {
        self.modes.iter().map(|m| u.dot(m)).collect()
    }
}

/// Builds `n_modes` unit-norm noise profiles `sigma_k = rot psi_k` with
/// `psi_k = sin^2(pi y) trig(2 pi k' x / Lx)`.
pub fn make_noise_modes(grid: Grid, n_modes: usize) -> Result<NoiseModel> {
    if n_modes > 0 {
        let (kmax, _) = mode_wavenumber(n_modes - 1);
        if 2 * kmax >= grid.nx() {
            return Err(LabError::config(format!(
                "{n_modes} noise modes need x-wavenumber {kmax}, above the resolvable limit {} of nx = {}",
                (grid.nx() - 1) / 2,
                grid.nx()
            )));
        }
    }
    let mut modes = Vec::with_capacity(n_modes);
    let mut mode_norms = Vec::with_capacity(n_modes);
    for k in 0..n_modes {
        let (kx, is_sin) = mode_wavenumber(k);
        let wave = 2.0 * PI * kx as f64 / grid.length_x();
        let mut psi = ScalarField::from_fn(grid, Location::Node, |x, y| {
            let trig = if is_sin { (wave * x).sin() } else { (wave * x).cos() };
            noise_profile(y).0 * trig
        });
        let ny = grid.ny();
        for i in 0..grid.nx() {
            psi.set(i, 0, 0.0);
            psi.set(i, ny, 0.0);
        }
        let sigma = rot(&psi)?.with_bc(BoundaryKind::NoSlip);
        let sigma = sigma.scaled(1.0 / l2_norm(&sigma));
        // nominal norm; the quadrature norm agrees to a few ulps
        mode_norms.push(1.0);
        modes.push(sigma);
    }
    Ok(NoiseModel {
        grid,
        modes,
        mode_norms,
        seed: 0,
    })
}

/// Gaussian increments `dW^k_j` of independent Brownian motions on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrownianPath {
    n_modes: usize,
    steps: Vec<f64>,
    /// Step-major: `increments[j * n_modes + k]`.
    increments: Vec<f64>,
}

impl BrownianPath {
    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Increments of step `j`, one per mode.
    pub fn step(&self, j: usize) -> &[f64] {
        &self.increments[j * self.n_modes..(j + 1) * self.n_modes]
    }

    /// `W^k(t_j)` for `j = 0..=n_steps`, starting at 0.
    pub fn running_sum(&self, k: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut w = 0.0;
        out.push(w);
        for j in 0..self.steps.len() {
            w += self.increments[j * self.n_modes + k];
            out.push(w);
        }
        out
    }

    /// Path on the grid with `factor` times larger steps, obtained by summing
    /// consecutive increments; a shorter trailing group is kept as is.
    pub fn coarsen(&self, factor: usize) -> BrownianPath {
        let factor = factor.max(1);
        let n = self.n_modes;
        let mut steps = Vec::new();
        let mut increments = Vec::new();
        for chunk in (0..self.steps.len()).collect::<Vec<_>>().chunks(factor) {
            steps.push(chunk.iter().map(|&j| self.steps[j]).sum());
            for k in 0..n {
                increments.push(chunk.iter().map(|&j| self.increments[j * n + k]).sum());
            }
        }
        BrownianPath {
            n_modes: n,
            steps,
            increments,
        }
    }
}

/// Draws the Brownian increments for `path_seed` on a uniform grid.
///
/// The generator is ChaCha8 keyed by the model seed with `path_seed` as its
/// stream id, so every path is an independent, reproducible stream.
pub fn sample_path(model: &NoiseModel, n_steps: usize, dt: f64, path_seed: u64) -> BrownianPath {
    sample_path_on(model.seed(), model.n_modes(), &vec![dt; n_steps], path_seed)
}

/// Draws increments on an arbitrary step sequence.
pub fn sample_path_on(seed: u64, n_modes: usize, steps: &[f64], path_seed: u64) -> BrownianPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_seed);
    let mut increments = Vec::with_capacity(steps.len() * n_modes);
    for dt in steps {
        let scale = dt.sqrt();
        for _ in 0..n_modes {
            let z: f64 = StandardNormal.sample(&mut rng);
            increments.push(scale * z);
        }
    }
    BrownianPath {
        n_modes,
        steps: steps.to_vec(),
        increments,
    }
}
