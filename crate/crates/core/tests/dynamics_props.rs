//! Structural properties of one stochastic Navier-Stokes step.

use inviscid_lab::dynamics::{
    make_initial_condition, make_noise_modes, ForcingSpec, IcKind, IcParams, NoiseModel, NsState, NsStepper,
};
use inviscid_lab::fields::{divergence, l2_norm, Grid, SolveMethod, VelocityField};
use proptest::prelude::*;

fn setup(n_modes: usize) -> (Grid, NoiseModel, VelocityField) {
    let g = Grid::unit(16).unwrap();
    let model = make_noise_modes(g, n_modes).unwrap();
    let u0 = make_initial_condition(IcKind::Smooth, g, &IcParams::default()).unwrap();
    (g, model, u0)
}

fn step(nu: f64, model: &NoiseModel, u0: &VelocityField, dw: &[f64]) -> VelocityField {
    let mut s = NsStepper::new(*u0.grid(), nu, SolveMethod::Direct).unwrap();
    let state = NsState::new(u0.clone(), nu).unwrap();
    s.step(&state, 0.005, model, dw, &ForcingSpec::zero()).unwrap().velocity
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn step_is_deterministic_solenoidal_and_impermeable(
        dw in prop::collection::vec(-0.2f64..0.2, 4),
        nu in 1e-4f64..0.1,
    ) {
        let (_, model, u0) = setup(4);
        let a = step(nu, &model, &u0, &dw);
        let b = step(nu, &model, &u0, &dw);
        prop_assert_eq!(&a, &b);
        prop_assert!(divergence(&a).max_abs() <= 1e-9);
        prop_assert_eq!(a.wall_normal_max(), 0.0);
    }

    #[test]
    fn zero_increments_reduce_to_the_deterministic_step(nu in 1e-4f64..0.1) {
        let (g, model, u0) = setup(4);
        let silent = make_noise_modes(g, 0).unwrap();
        let a = step(nu, &model, &u0, &[0.0; 4]);
        let b = step(nu, &silent, &u0, &[]);
        prop_assert!(a.sub(&b).unwrap().max_abs() <= 1e-14);
    }

    #[test]
    fn noise_energy_matches_increment_energy(dw in prop::collection::vec(-1.0f64..1.0, 6)) {
        let (_, model, _) = setup(6);
        let xi = model.combine(&dw).unwrap();
        let expected: f64 = dw.iter().map(|w| w * w).sum();
        prop_assert!((l2_norm(&xi).powi(2) - expected).abs() <= 1e-12 * (1.0 + expected));
        // sqrt(2 nu) xi carries exactly twice the energy of sqrt(nu) xi
        let nu: f64 = 0.013;
        let once = l2_norm(&xi.scaled(nu.sqrt())).powi(2);
        let twice = l2_norm(&xi.scaled((2.0 * nu).sqrt())).powi(2);
        prop_assert!((twice - 2.0 * once).abs() <= 1e-13 * twice.max(1e-300));
    }
}
