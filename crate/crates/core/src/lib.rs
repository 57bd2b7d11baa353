//! A 2D channel-flow laboratory for the vanishing-viscosity limit.
//!
//! The crate simulates the incompressible Navier-Stokes equations with additive
//! noise `nu^{1/2} sum_k sigma_k dW^k` and no-slip walls, the matching inviscid
//! Euler equations, and measures the quantities that govern the inviscid limit:
//! energy balances, Kato's boundary-layer corrector and its norm scalings, and
//! the layer-dissipation functionals.
//!
//! The domain is the periodic channel `[0, Lx) x [0, 1]` with solid walls at
//! `y = 0` and `y = 1`, discretized on a staggered (MAC) grid.
//!
//! Module map:
//!
//! * [`fields`]: grid, staggered fields, discrete operators, Poisson solvers,
//!   Leray projection, norms.
//! * [`dynamics`]: noise model, Brownian paths, the Navier-Stokes and Euler
//!   steppers, initial conditions and forcing.
//! * [`corrector`]: Kato's corrector `v = div(z a)` and its scaling report.
//! * [`diagnostics`]: energy-equality / Itô residuals, weak-form residuals,
//!   Kato functionals, convergence metrics and Gronwall-type stability checks.
//! * [`ensemble`]: seeded Monte Carlo orchestration across viscosity sweeps.
//! * [`cli`]: config parsing, subcommands and serialization.
//!
//! Runnable walkthroughs live in `examples/`, one per capability.

// `!(x > 0.0)` guards reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod cli;
pub mod corrector;
pub mod diagnostics;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod fields;
pub mod stats;

pub use error::{LabError, Result};
