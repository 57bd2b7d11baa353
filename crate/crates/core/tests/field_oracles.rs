//! Dense oracles for the projection and the trilinear form.

use std::f64::consts::PI;

mod common;

use common::{analytic_transported, brute_force_trilinear, kkt_projection, random_field, skewness_defect};
use inviscid_lab::fields::{
    divergence, h1_seminorm, l2_norm, rot, trilinear_form, BoundaryKind, Grid, Location, Projector,
    ScalarField, SolveMethod,
};
use inviscid_lab::stats::log_log_fit;
use proptest::prelude::*;

#[test]
fn projection_matches_dense_kkt_solve() {
    let g = Grid::unit(8).unwrap();
    let proj = Projector::new(g, SolveMethod::Direct).unwrap();
    for seed in 0..5 {
        let f = random_field(g, seed, BoundaryKind::Free);
        let fast = proj.project(&f).unwrap();
        let dense = kkt_projection(&f);
        let err = fast.sub(&dense).unwrap().max_abs();
        assert!(err <= 1e-10, "seed {seed}: max error {err:e}");
    }
}

#[test]
fn projection_matches_kkt_on_a_stretched_box() {
    let g = Grid::new(10, 8, 2.5).unwrap();
    let f = random_field(g, 99, BoundaryKind::Free);
    let fast = Projector::new(g, SolveMethod::Direct).unwrap().project(&f).unwrap();
    assert!(fast.sub(&kkt_projection(&f)).unwrap().max_abs() <= 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn projection_is_idempotent_and_contractive(seed in any::<u64>()) {
        let g = Grid::new(16, 12, 1.0).unwrap();
        let proj = Projector::new(g, SolveMethod::Direct).unwrap();
        let f = random_field(g, seed, BoundaryKind::Free);
        let pf = proj.project(&f).unwrap();
        let ppf = proj.project(&pf).unwrap();
        prop_assert!(ppf.sub(&pf).unwrap().max_abs() <= 1e-10);
        prop_assert!(l2_norm(&pf) <= l2_norm(&f) * (1.0 + 1e-12));
        prop_assert!(divergence(&pf).max_abs() <= 1e-9);
        prop_assert_eq!(pf.wall_normal_max(), 0.0);
    }
}

#[test]
fn trilinear_form_matches_face_assembly() {
    let g = Grid::unit(8).unwrap();
    for seed in 0..10 {
        let a = random_field(g, 3 * seed, BoundaryKind::NoPenetration);
        let b = random_field(g, 3 * seed + 1, BoundaryKind::NoPenetration);
        let c = random_field(g, 3 * seed + 2, BoundaryKind::NoPenetration);
        let fast = trilinear_form(&a, &b, &c).unwrap();
        let slow = brute_force_trilinear(&a, &b, &c);
        assert!((fast - slow).abs() <= 1e-12, "seed {seed}: {fast} vs {slow}");
    }
}

#[test]
fn skewness_defect_of_sampled_advector_converges() {
    let ns = [32usize, 64, 128];
    let hs: Vec<f64> = ns.iter().map(|n| 1.0 / *n as f64).collect();
    let defects: Vec<f64> = ns.iter().map(|n| skewness_defect(*n)).collect();
    let fit = log_log_fit(&hs, &defects, 0.95).unwrap();
    assert!(fit.slope >= 1.0, "order {} from {defects:?}", fit.slope);
}

#[test]
fn rot_advector_is_skew_to_roundoff_at_every_resolution() {
    for n in [32, 64, 128] {
        let g = Grid::unit(n).unwrap();
        let psi = ScalarField::from_fn(g, Location::Node, |x, y| {
            (PI * y).sin().powi(2) * ((2.0 * PI * x).cos() + 0.3 * (4.0 * PI * x).sin()) / (2.0 * PI)
        });
        let a = rot(&psi).unwrap().with_bc(BoundaryKind::NoPenetration);
        let w = analytic_transported(g);
        let b = trilinear_form(&a, &w, &w).unwrap();
        let scale = l2_norm(&a) * h1_seminorm(&w) * l2_norm(&w);
        assert!(b.abs() <= 1e-13 * scale, "n = {n}: {b:e}");
    }
}
