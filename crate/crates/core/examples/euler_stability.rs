//! Euler energy drift and Gronwall stability of twin runs.
//!
//! `cargo run --release --example euler_stability [-- configs/euler.toml [configs/theorem7.toml]]`

use inviscid_lab::ensemble::{euler_energy, stability_twins, ExperimentConfig};

fn load(path: &str) -> Result<ExperimentConfig, Box<dyn std::error::Error>> {
    Ok(ExperimentConfig::from_toml(&std::fs::read_to_string(path)?)?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let energy_cfg = load(&args.next().unwrap_or_else(|| "configs/euler.toml".into()))?;
    let forced_cfg = load(&args.next().unwrap_or_else(|| "configs/theorem7.toml".into()))?;
    let start = std::time::Instant::now();
    let e = euler_energy(&energy_cfg)?;
    println!("{}x{} dt = {} T = {}: relative energy drift {:.3e}", e.nx, e.ny, e.dt, e.horizon, e.relative_energy_drift);
    let s = stability_twins(&energy_cfg, 1e-3)?;
    println!("unforced twins: satisfied {} worst lhs/rhs {:.4}", s.unforced.satisfied, s.unforced.worst_ratio);
    let f = stability_twins(&forced_cfg, 1e-3)?;
    if let Some(b) = &f.forced {
        println!("forced twins: satisfied {} worst lhs/rhs {:.4}", b.satisfied, b.worst_ratio);
    }
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
