use super::field::{BoundaryKind, Location, ScalarField, VelocityField};
use super::grid::Grid;
use super::ops::{divergence, gradient};
use super::poisson::{SeparableSolver, SolveMethod, SolveStats, WallClosure};
use crate::error::Result;

/// Discrete Leray projector onto divergence-free fields with zero wall-normal
/// velocity.
///
/// The wall rows of `uy` are zeroed, `L p = div u` is solved with Neumann
/// walls and `grad p` is subtracted. Since `L = div grad` and `grad` is the
/// negative adjoint of `div`, the map is the orthogonal projection in the
/// quadrature inner product: idempotent, self-adjoint and a contraction.
#[derive(Debug, Clone)]
pub struct Projector {
    solver: SeparableSolver,
}

impl Projector {
    pub fn new(grid: Grid, method: SolveMethod) -> Result<Self> {
        Ok(Self {
            solver: SeparableSolver::poisson(grid, WallClosure::CenterNeumann, method)?,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.solver.grid()
    }

    pub fn method(&self) -> SolveMethod {
        self.solver.method()
    }

    /// Projects `f`; the result keeps the tag of `f` unless it was
    /// [`BoundaryKind::Free`], which becomes no-penetration.
    pub fn project(&self, f: &VelocityField) -> Result<VelocityField> {
        Ok(self.project_with_pressure(f)?.0)
    }

    /// Projection together with the pressure potential and solve metadata.
    pub fn project_with_pressure(&self, f: &VelocityField) -> Result<(VelocityField, ScalarField, SolveStats)> {
        self.solver.grid().ensure_same(f.grid(), "projection")?;
        let bc = match f.bc() {
            BoundaryKind::Free => BoundaryKind::NoPenetration,
            other => other,
        };
        let u = f.clone().with_bc(bc);
        let div = divergence(&u);
        let (p, stats) = self.solver.solve(div.values())?;
        let p = ScalarField::from_values(*u.grid(), Location::Center, p)?;
        let mut out = u;
        out.axpy_in_place(-1.0, &gradient(&p)?)?;
        Ok((out, p, stats))
    }
}

/// One-shot Leray projection with the direct solver.
pub fn leray_project(f: &VelocityField) -> Result<VelocityField> {
    Projector::new(*f.grid(), SolveMethod::Direct)?.project(f)
}
