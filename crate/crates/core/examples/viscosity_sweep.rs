//! Condition functionals over a viscosity sweep with smooth matched data.
//!
//! `cargo run --release --example viscosity_sweep [-- configs/sweep.toml]`

use inviscid_lab::ensemble::{run_sweep, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/sweep.toml".into());
    let config = ExperimentConfig::from_toml(&std::fs::read_to_string(&path)?)?;
    let start = std::time::Instant::now();
    let report = run_sweep(&config)?;
    println!("{:>10} {:>11} {:>11} {:>11} {:>11} {:>11} {:>6}", "nu", "M1", "M2", "D_total", "D_layer", "weak", "failed");
    for r in &report.reports {
        println!(
            "{:>10.3e} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>6}",
            r.nu, r.m1.mean, r.m2.mean, r.d_total.mean, r.d_layer.mean, r.weak_gap_max, r.paths_failed
        );
    }
    println!("row invariants hold: {}", report.invariants_hold());
    println!("monotonicity: {:?}", report.monotonicity);
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
