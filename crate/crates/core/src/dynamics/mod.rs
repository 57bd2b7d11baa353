//! Time integration of the stochastic Navier-Stokes and Euler equations, the
//! noise model, forcing and the initial-condition factory.

pub mod euler;
pub mod forcing;
pub mod initial;
pub mod noise;
pub mod ns;
pub mod time;

pub use euler::{arakawa_jacobian, euler_step, EulerState, EulerStepper};
pub use forcing::{ForcingSpec, ForcingTerm};
pub use initial::{
    initial_stream, make_initial_condition, perturbation_direction, stream_from_modes, IcKind, IcParams,
    StreamMode,
};
pub use noise::{make_noise_modes, sample_path, sample_path_on, BrownianPath, NoiseModel};
pub use ns::{courant, ns_step, NsState, NsStepper, DEFAULT_CFL};
pub use time::TimeGrid;
