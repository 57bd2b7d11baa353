use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fields::{curl, l2_norm, BoundaryKind, Grid, ScalarField, VelocityField};

/// One term `amplitude * cos(2 pi frequency t) * field` of a body force.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForcingTerm {
    field: VelocityField,
    curl: ScalarField,
    amplitude: f64,
    frequency: f64,
}

impl ForcingTerm {
    /// `field` must be discretely divergence-free with zero wall-normal
    /// velocity (for example `rot` of a wall-vanishing stream function).
    pub fn new(field: VelocityField, amplitude: f64, frequency: f64) -> Self {
        let field = field.with_bc(BoundaryKind::NoPenetration);
        let curl = curl(&field);
        Self {
            field,
            curl,
            amplitude,
            frequency,
        }
    }

    #[inline]
    fn factor(&self, t: f64) -> f64 {
        self.amplitude * (2.0 * std::f64::consts::PI * self.frequency * t).cos()
    }
}

/// External body force `f(t)`; the empty sum is the zero force.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ForcingSpec {
    terms: Vec<ForcingTerm>,
}

impl ForcingSpec {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(term: ForcingTerm) -> Self {
        Self { terms: vec![term] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.amplitude == 0.0)
    }

    pub fn terms(&self) -> &[ForcingTerm] {
        &self.terms
    }

    /// `f^n = f + g`: the rough perturbation used by the forced
    /// deterministic experiments.
    pub fn perturbed(&self, extra: ForcingTerm) -> Self {
        let mut terms = self.terms.clone();
        terms.push(extra);
        Self { terms }
    }

    /// `f(t)` on `grid`, or `None` for the zero force.
    pub fn eval(&self, grid: &Grid, t: f64) -> Result<Option<VelocityField>> {
        if self.is_zero() {
            return Ok(None);
        }
        let mut out = VelocityField::zeros(*grid, BoundaryKind::NoPenetration);
        for term in &self.terms {
            out.axpy_in_place(term.factor(t), &term.field)?;
        }
        Ok(Some(out))
    }

    /// Node curl of `f(t)`, or `None` for the zero force.
    pub fn eval_curl(&self, t: f64) -> Result<Option<ScalarField>> {
        if self.is_zero() {
            return Ok(None);
        }
        let mut it = self.terms.iter();
        let first = it.next().expect("nonzero force has a term");
        let mut out = first.curl.scaled(first.factor(t));
        for term in it {
            out = out.axpy(term.factor(t), &term.curl)?;
        }
        Ok(Some(out))
    }

    /// `|f(t)|_{L^2}`.
    pub fn norm_at(&self, grid: &Grid, t: f64) -> Result<f64> {
        Ok(self.eval(grid, t)?.map(|f| l2_norm(&f)).unwrap_or(0.0))
    }

    /// `|f - g|(t)` in `L^2`.
    pub fn distance_at(&self, other: &ForcingSpec, grid: &Grid, t: f64) -> Result<f64> {
        let a = self.eval(grid, t)?.unwrap_or_else(|| VelocityField::zeros(*grid, BoundaryKind::NoPenetration));
        let b = other.eval(grid, t)?.unwrap_or_else(|| VelocityField::zeros(*grid, BoundaryKind::NoPenetration));
        Ok(l2_norm(&a.sub(&b)?))
    }
}
