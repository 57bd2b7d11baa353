//! Conservative (divergence-form) advection on the staggered grid and the
//! trilinear form built from it.
//!
//! Each velocity unknown owns a control volume. Mass fluxes through its faces
//! are averages of the advecting field `a`; the advected value on a face is
//! the average of the two neighbouring samples of `b`, with value 0 on wall
//! faces (no-slip ghost) and with wall rows of `b.uy` read as 0.
//!
//! The flux sum around every control volume is the average of the two
//! adjacent cell divergences of `a`. Hence `<A(a) w, w>` vanishes exactly when
//! `a` is discretely divergence-free with zero wall-normal velocity, and is
//! `O(|div_h a|)` otherwise.

use super::field::VelocityField;
use crate::error::Result;

/// `A(a) b`, the discrete `div(a (x) b) = (a . grad) b + (div a) b`.
///
/// The result has zero wall rows in `uy` and the boundary tag of `b`.
pub fn advection(a: &VelocityField, b: &VelocityField) -> Result<VelocityField> {
    a.grid().ensure_same(b.grid(), "advection")?;
    let g = *a.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (dx, dy) = (g.dx(), g.dy());
    let (ax, ay) = (a.ux(), a.uy());
    let (bx, by) = (b.ux(), b.uy());
    let inv_area = 1.0 / (dx * dy);

    let mut out_x = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let ip = g.ip(i);
            let im = g.im(i);
            let c = bx[j * nx + i];
            let fe = 0.5 * (ax[j * nx + i] + ax[j * nx + ip]) * dy;
            let fw = 0.5 * (ax[j * nx + im] + ax[j * nx + i]) * dy;
            let fn_ = 0.5 * (ay[(j + 1) * nx + im] + ay[(j + 1) * nx + i]) * dx;
            let fs = 0.5 * (ay[j * nx + im] + ay[j * nx + i]) * dx;
            let ve = 0.5 * (c + bx[j * nx + ip]);
            let vw = 0.5 * (bx[j * nx + im] + c);
            let vn = if j + 1 < ny {
                0.5 * (c + bx[(j + 1) * nx + i])
            } else {
                0.0
            };
            let vs = if j > 0 {
                0.5 * (bx[(j - 1) * nx + i] + c)
            } else {
                0.0
            };
            out_x[j * nx + i] = (fe * ve - fw * vw + fn_ * vn - fs * vs) * inv_area;
        }
    }

    let byv = |i: usize, j: usize| -> f64 {
        if j == 0 || j == ny {
            0.0
        } else {
            by[j * nx + i]
        }
    };
    let mut out_y = vec![0.0; nx * (ny + 1)];
    for j in 1..ny {
        for i in 0..nx {
            let ip = g.ip(i);
            let im = g.im(i);
            let c = by[j * nx + i];
            let fe = 0.5 * (ax[(j - 1) * nx + ip] + ax[j * nx + ip]) * dy;
            let fw = 0.5 * (ax[(j - 1) * nx + i] + ax[j * nx + i]) * dy;
            let fn_ = 0.5 * (ay[j * nx + i] + ay[(j + 1) * nx + i]) * dx;
            let fs = 0.5 * (ay[(j - 1) * nx + i] + ay[j * nx + i]) * dx;
            let ve = 0.5 * (c + by[j * nx + ip]);
            let vw = 0.5 * (by[j * nx + im] + c);
            let vn = 0.5 * (c + byv(i, j + 1));
            let vs = 0.5 * (byv(i, j - 1) + c);
            out_y[j * nx + i] = (fe * ve - fw * vw + fn_ * vn - fs * vs) * inv_area;
        }
    }
    VelocityField::from_parts(g, out_x, out_y, b.bc())
}

/// Discrete `b(a, b, c) = int (a . grad b) . c`, evaluated as `<A(a) b, c>`.
pub fn trilinear_form(a: &VelocityField, b: &VelocityField, c: &VelocityField) -> Result<f64> {
    a.grid().ensure_same(c.grid(), "trilinear form")?;
    Ok(advection(a, b)?.dot_unchecked(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::field::{BoundaryKind, Location, ScalarField};
    use crate::fields::grid::Grid;
    use crate::fields::ops::rot;
    use proptest::prelude::*;

    #[test]
    fn zero_second_argument_gives_zero() {
        let g = Grid::unit(8).unwrap();
        let a = VelocityField::from_fn(g, BoundaryKind::Free, |x, y| (x, y));
        let z = VelocityField::zeros(g, BoundaryKind::Free);
        assert_eq!(trilinear_form(&a, &z, &a).unwrap(), 0.0);
    }

    #[test]
    fn uniform_advection_of_linear_profile() {
        // a = (1, 0), b = (sin(2 pi x), 0): (a . grad) b = (2 pi cos(2 pi x), 0)
        let g = Grid::unit(128).unwrap();
        let a = VelocityField::from_fn(g, BoundaryKind::Free, |_, _| (1.0, 0.0)).with_bc(BoundaryKind::NoPenetration);
        let b = VelocityField::from_fn(g, BoundaryKind::Free, |x, _| ((2.0 * std::f64::consts::PI * x).sin(), 0.0));
        let ab = advection(&a, &b).unwrap();
        let exact = VelocityField::from_fn(g, BoundaryKind::Free, |x, _| {
            (2.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * x).cos(), 0.0)
        });
        // centered difference error 2 pi (1 - sinc(2 pi h)) ~ 2.5e-3 at h = 1/128
        assert!(ab.sub(&exact).unwrap().max_abs() < 3e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn exactly_skew_for_discretely_solenoidal_advector(seed in any::<u64>()) {
            let g = Grid::new(12, 10, 1.3).unwrap();
            let mut s = seed | 1;
            let mut next = move || {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            let mut psi = ScalarField::zeros(g, Location::Node);
            for j in 1..g.ny() {
                for i in 0..g.nx() {
                    psi.set(i, j, next());
                }
            }
            let a = rot(&psi).unwrap().with_bc(BoundaryKind::NoPenetration);
            let ux = (0..g.nx() * g.ny()).map(|_| next()).collect();
            let uy = (0..g.nx() * (g.ny() + 1)).map(|_| next()).collect();
            let w = VelocityField::from_parts(g, ux, uy, BoundaryKind::NoPenetration).unwrap();
            let b = trilinear_form(&a, &w, &w).unwrap();
            let scale = crate::fields::norms::l2_norm(&a) * crate::fields::norms::l2_norm(&w).powi(2) / g.min_spacing();
            prop_assert!(b.abs() <= 1e-13 * scale, "b = {b}, scale = {scale}");
        }
    }
}
