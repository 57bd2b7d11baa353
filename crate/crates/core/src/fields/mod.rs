//! Grids, staggered fields, discrete operators, the Leray projection and norms.

pub mod field;
pub mod grid;
pub mod norms;
pub mod ops;
pub mod poisson;
pub mod projection;
pub mod trilinear;

pub use field::{BoundaryKind, Location, ScalarField, VelocityField};
pub use grid::{wall_distance, Grid, CHANNEL_HEIGHT};
pub use norms::{
    grad_l2_layer_sq, grad_linf_norm, h1_seminorm, l2_layer_sq, l2_norm, layer_norms, linf_norm,
    LayerNorms, LayerRegion,
};
pub use ops::{center_gradient, curl, divergence, gradient, node_laplacian, rot, vector_laplacian};
pub use poisson::{SeparableSolver, SolveMethod, SolveStats, WallClosure};
pub use projection::{leray_project, Projector};
pub use trilinear::{advection, trilinear_form};
