//! Builds the boundary-layer corrector of a smooth Euler state on a 128x512
//! channel and prints the eight norms per layer width with fitted slopes.

use inviscid_lab::corrector::corrector_scaling_report;
use inviscid_lab::dynamics::{initial_stream, EulerStepper, IcKind, IcParams};
use inviscid_lab::fields::{Grid, SolveMethod};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(128, 512, 1.0)?;
    let psi = initial_stream(IcKind::Smooth, grid, &IcParams::default())?;
    let state = EulerStepper::new(grid, SolveMethod::Direct)?.from_stream(&psi, 0.0)?;
    let deltas = [0.125, 0.0625, 0.03125, 0.015625];
    let report = corrector_scaling_report(&state, &deltas, 5e-4)?;

    println!("{:>10} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}", "delta",
        "v_linf", "v_l2", "dtv_l2", "grad_linf", "grad_l2", "rho_gl_inf", "rho2_gl_inf", "rho_gl_2");
    for row in &report.rows {
        print!("{:>10.6}", row.delta);
        for v in row.values() {
            print!(" {v:>12.5e}");
        }
        println!();
    }
    println!();
    for s in &report.slopes {
        println!(
            "{:<16} slope {:+.3}  expected {:+.2}  95% CI [{:+.3}, {:+.3}]",
            s.name, s.fit.slope, s.expected, s.fit.ci_low, s.fit.ci_high
        );
    }
    Ok(())
}
