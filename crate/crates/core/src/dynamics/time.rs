use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Uniform time grid on `[0, T]` whose last step is shortened to land on `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    dt: f64,
    steps: Vec<f64>,
}

impl TimeGrid {
    /// `n = ceil(T / dt)` steps; a remainder below `1e-9 dt` is absorbed.
    pub fn new(horizon: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(LabError::config(format!("time step must be positive, got {dt}")));
        }
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(LabError::config(format!("horizon must be nonnegative, got {horizon}")));
        }
        let n = (horizon / dt - 1e-9).ceil().max(0.0) as usize;
        let mut steps = vec![dt; n];
        if n > 0 {
            steps[n - 1] = horizon - (n - 1) as f64 * dt;
        }
        Ok(Self { horizon, dt, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    /// `t_j` for `j = 0..=n_steps`, with `t_n = T` exactly.
    pub fn times(&self) -> Vec<f64> {
        let n = self.steps.len();
        let mut t: Vec<f64> = (0..n).map(|j| j as f64 * self.dt).collect();
        t.push(self.horizon);
        t
    }

    /// Step indices of `count` checkpoints spread over the grid, always
    /// including index 0 and `n_steps`; duplicates are removed.
    pub fn checkpoint_indices(&self, count: usize) -> Vec<usize> {
        let n = self.steps.len();
        let count = count.max(1);
        let mut idx: Vec<usize> = std::iter::once(0)
            .chain((1..=count).map(|i| ((i as f64 * n as f64) / count as f64).round() as usize))
            .collect();
        idx.dedup();
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_step_lands_on_horizon() {
        let g = TimeGrid::new(1.0, 0.3).unwrap();
        assert_eq!(g.n_steps(), 4);
        assert!((g.steps()[3] - 0.1).abs() < 1e-15);
        assert_eq!(*g.times().last().unwrap(), 1.0);
        let exact = TimeGrid::new(0.5, 1e-3).unwrap();
        assert_eq!(exact.n_steps(), 500);
    }

    #[test]
    fn checkpoints_cover_both_ends() {
        let g = TimeGrid::new(1.0, 0.01).unwrap();
        let c = g.checkpoint_indices(64);
        assert_eq!(c[0], 0);
        assert_eq!(*c.last().unwrap(), 100);
        assert_eq!(c.len(), 65);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(TimeGrid::new(0.0, 0.1).unwrap().checkpoint_indices(8), vec![0]);
    }
}
