//! Energy equality and Itô-formula residuals under step refinement.
//!
//! `cargo run --release --example energy_audit [-- configs/energy.toml]`

use inviscid_lab::ensemble::{energy_audit, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/energy.toml".into());
    let config = ExperimentConfig::from_toml(&std::fs::read_to_string(&path)?)?;
    let start = std::time::Instant::now();
    let report = energy_audit(&config)?;
    println!("nu = {}, N = {}, M = {}", report.nu, report.n_modes, report.ensemble_size);
    println!("{:>8} {:>12} {:>12} {:>12} {:>10} {:>12} {:>8}", "dt", "max|R|", "R(T)", "E|r(T)|", "max z", "uniform", "drift");
    for l in &report.levels {
        println!(
            "{:>8.1e} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.3} {:>12} {:>8}",
            l.dt,
            l.max_residual,
            l.final_residual.mean,
            l.ito_final_abs.mean,
            l.ito.max_z(),
            l.uniform.satisfied,
            l.drift_final == l.drift_nominal,
        );
    }
    let slope = |f: Option<inviscid_lab::stats::LineFit>| f.map_or(f64::NAN, |f| f.slope);
    println!("order max|R|: {:.3}", slope(report.max_residual_order));
    println!("order |R(T)|: {:.3}", slope(report.final_residual_order));
    println!("order E|r(T)|: {:.3}", slope(report.ito_order));
    println!("pairwise orders max|R|: {:?}", report.pair_orders);
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
