//! Command-line front end.
//!
//! Every command reads one TOML configuration, writes its outputs into
//! `--out` and finishes with `manifest.json`. CSV files start with a
//! `# config_hash=` line and JSON files carry a `config_hash` field; the
//! `compare` command refuses to mix files with different hashes.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 under-resolved boundary layer.

pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::corrector::{corrector_scaling_report, CorrectorNorms, ScalingReport};
use crate::diagnostics::ConditionReport;
use crate::ensemble::{
    energy_audit, euler_energy, run_path, run_sweep, stability_twins, theorem6_schedule, AuditReport,
    Experiment, ExperimentConfig, Mode, SweepReport,
};
use crate::error::{LabError, Result};
use output::{num, read_config_hash, Csv, OutputDir};

/// Environment variable that forces a single worker thread.
pub const DETERMINISTIC_ENV: &str = "INVISCID_LAB_DETERMINISTIC";

/// Initial separation of the twin Euler runs.
pub const TWIN_SEPARATION: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "inviscid-lab", version, about = "Stochastic Navier-Stokes and Euler channel-flow experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding `ensemble.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Checkpoint count, overriding `time.checkpoints`.
    #[arg(long, global = true)]
    pub checkpoints: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One viscous path: trajectory CSV and record JSON.
    Simulate {
        /// Path index (selects the Brownian stream).
        #[arg(long, default_value_t = 0)]
        path: usize,
    },
    /// Euler energy conservation and twin-run stability.
    Euler,
    /// Corrector norms and slopes on a frozen Euler snapshot.
    CorrectorCheck,
    /// Condition functionals over the viscosity sweep.
    Sweep,
    /// Energy equality, Itô formula and weak formulation under step refinement.
    EnergyAudit,
    /// Rough initial data with mollified viscous data.
    Theorem6,
    /// Deterministic viscous runs with perturbed forces.
    Theorem7,
    /// Checks that output files share one configuration hash.
    Compare {
        #[arg(required = true, num_args = 2..)]
        files: Vec<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Euler => "euler",
            Command::CorrectorCheck => "corrector-check",
            Command::Sweep => "sweep",
            Command::EnergyAudit => "energy-audit",
            Command::Theorem6 => "theorem6",
            Command::Theorem7 => "theorem7",
            Command::Compare { .. } => "compare",
        }
    }
}

/// Process exit code of an error.
pub fn exit_code(e: &LabError) -> i32 {
    match e {
        LabError::Config(_) | LabError::InvalidInput(_) | LabError::Io(_) => 2,
        LabError::UnderResolved { .. } => 4,
        LabError::StepSize { .. }
        | LabError::SolverNotConverged { .. }
        | LabError::Numerical(_)
        | LabError::Shape(_)
        | LabError::SweepFailed(_) => 3,
    }
}

/// Worker count from the flag and the environment.
pub fn thread_count(flag: Option<usize>) -> usize {
    let forced = std::env::var(DETERMINISTIC_ENV).is_ok_and(|v| v == "1");
    if forced {
        1
    } else {
        flag.unwrap_or(0)
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| LabError::config("--config PATH is required"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::from_toml(&text)
        .map_err(|e| LabError::config(format!("{}: {e}", path.display())))?;
    if let Some(seed) = cli.seed {
        cfg.ensemble.seed = seed;
    }
    if let Some(c) = cli.checkpoints {
        cfg.time.checkpoints = c;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let threads = thread_count(cli.threads);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 3;
        }
    };
    match pool.install(|| dispatch(&cli, pool.current_num_threads())) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli, threads: usize) -> Result<i32> {
    if let Command::Compare { files } = &cli.command {
        return compare(files);
    }
    let cfg = load_config(cli)?;
    let hash = cfg.hash();
    let mut out = OutputDir::create(&cli.out)?;
    out.write("config.toml", cfg.to_toml().as_bytes())?;
    let code = match &cli.command {
        Command::Simulate { path } => simulate(&cfg, *path, &mut out)?,
        Command::Euler => euler(&cfg, &mut out)?,
        Command::CorrectorCheck => corrector_check(&cfg, &mut out)?,
        Command::Sweep => {
            let report = run_sweep(&cfg)?;
            write_sweep(&report, &mut out)?;
            0
        }
        Command::EnergyAudit => {
            let report = energy_audit(&cfg)?;
            write_audit(&report, &mut out)?;
            0
        }
        Command::Theorem6 => theorem6(&cfg, &mut out)?,
        Command::Theorem7 => theorem7(&cfg, &mut out)?,
        Command::Compare { .. } => unreachable!("handled above"),
    };
    let manifest = out.finish(&hash, cli.command.name(), threads, code)?;
    println!(
        "{}: {} files written to {} (config_hash={hash})",
        cli.command.name(),
        manifest.files.len() + 1,
        cli.out.display()
    );
    Ok(code)
}

fn compare(files: &[PathBuf]) -> Result<i32> {
    let hashes = files.iter().map(|f| read_config_hash(f)).collect::<Result<Vec<_>>>()?;
    if let Some((i, h)) = hashes.iter().enumerate().find(|(_, h)| **h != hashes[0]) {
        return Err(LabError::config(format!(
            "{} has config_hash={h} but {} has config_hash={}",
            files[i].display(),
            files[0].display(),
            hashes[0]
        )));
    }
    println!("{} files share config_hash={}", files.len(), hashes[0]);
    Ok(0)
}

#[derive(serde::Serialize)]
struct Tagged<'a, T> {
    config_hash: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

fn simulate(cfg: &ExperimentConfig, path: usize, out: &mut OutputDir) -> Result<i32> {
    let hash = cfg.hash();
    let rec = run_path(cfg, cfg.physics.nu, path)?;
    let mut csv = Csv::new(&hash, &["t", "energy", "grad_sq", "layer_grad_sq"]);
    for j in 0..rec.times.len() {
        csv.row([num(rec.times[j]), num(rec.energy[j]), num(rec.dissipation[j]), num(rec.layer_dissipation[j])]);
    }
    out.write_csv("trajectory.csv", csv)?;
    let mut cps = Csv::new(&hash, &["index", "t", "gap_sq"]);
    for c in &rec.checkpoints {
        cps.row([c.index.to_string(), num(c.time), c.gap_sq.map_or_else(|| "nan".into(), num)]);
    }
    out.write_csv("checkpoints.csv", cps)?;
    out.write_json("record.json", &Tagged { config_hash: &hash, body: &rec })?;
    Ok(0)
}

fn euler(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<i32> {
    let hash = cfg.hash();
    let e = euler_energy(cfg)?;
    let mut csv = Csv::new(&hash, &["t", "energy"]);
    for (t, en) in e.times.iter().zip(&e.energy) {
        csv.row([num(*t), num(*en)]);
    }
    out.write_csv("euler_energy.csv", csv)?;
    let s = stability_twins(cfg, TWIN_SEPARATION)?;
    write_bound(out, &hash, "gronwall.csv", &s.unforced)?;
    if let Some(f) = &s.forced {
        write_bound(out, &hash, "gronwall_forced.csv", f)?;
    }
    out.write_json("euler.json", &e)?;
    out.write_json("stability.json", &s)?;
    println!("relative energy drift {:.3e}; gronwall satisfied {}", e.relative_energy_drift, s.unforced.satisfied);
    Ok(0)
}

fn write_bound(out: &mut OutputDir, hash: &str, name: &str, b: &crate::diagnostics::BoundCheck) -> Result<()> {
    let mut csv = Csv::new(hash, &["t", "lhs", "rhs"]);
    for ((t, l), r) in b.times.iter().zip(&b.lhs).zip(&b.rhs) {
        csv.row([num(*t), num(*l), num(*r)]);
    }
    out.write_csv(name, csv)
}

/// Writes the norm table and slope summary of a corrector report.
pub fn write_corrector(report: &ScalingReport, hash: &str, tolerance: f64, out: &mut OutputDir) -> Result<bool> {
    let mut header = vec!["delta"];
    header.extend(CorrectorNorms::NAMES);
    let mut table = Csv::new(hash, &header);
    for r in &report.rows {
        table.row(std::iter::once(num(r.delta)).chain(r.values().into_iter().map(num)));
    }
    out.write_csv("corrector_norms.csv", table)?;
    let mut slopes = Csv::new(hash, &["norm", "expected", "slope", "ci_low", "ci_high", "constant", "within"]);
    let mut all = true;
    for s in &report.slopes {
        let ok = s.within(tolerance);
        all &= ok;
        slopes.row([
            s.name.clone(),
            num(s.expected),
            num(s.fit.slope),
            num(s.fit.ci_low),
            num(s.fit.ci_high),
            num(s.constant),
            ok.to_string(),
        ]);
    }
    out.write_csv("corrector_slopes.csv", slopes)?;
    Ok(all)
}

fn corrector_check(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<i32> {
    let hash = cfg.hash();
    let exp = Experiment::new(cfg)?;
    let snap = exp.euler_snapshot(cfg.corrector.snapshot_time)?;
    let report = corrector_scaling_report(&snap, &cfg.corrector.deltas, cfg.corrector.dt)?;
    let all = write_corrector(&report, &hash, cfg.corrector.tolerance, out)?;
    out.write_json("corrector.json", &Tagged { config_hash: &hash, body: &report })?;
    for s in &report.slopes {
        println!("{:>15} slope {:+.3} (expected {:+.1})", s.name, s.fit.slope, s.expected);
    }
    Ok(if cfg.corrector.hard && !all { 3 } else { 0 })
}

const SWEEP_HEADER: [&str; 11] = [
    "nu",
    "M1",
    "M1_se",
    "M2",
    "M2_se",
    "D_total",
    "D_total_se",
    "D_layer",
    "D_layer_se",
    "weak_gap_max",
    "paths_failed",
];

fn sweep_row(r: &ConditionReport) -> Vec<String> {
    vec![
        num(r.nu),
        num(r.m1.mean),
        num(r.m1.se),
        num(r.m2.mean),
        num(r.m2.se),
        num(r.d_total.mean),
        num(r.d_total.se),
        num(r.d_layer.mean),
        num(r.d_layer.se),
        num(r.weak_gap_max),
        r.paths_failed.to_string(),
    ]
}

/// Writes `sweep.csv`, one plot-data file per metric and `sweep.json`.
pub fn write_sweep(report: &SweepReport, out: &mut OutputDir) -> Result<()> {
    let hash = &report.config_hash;
    let mut csv = Csv::new(hash, &SWEEP_HEADER);
    for r in &report.reports {
        csv.row(sweep_row(r));
    }
    out.write_csv("sweep.csv", csv)?;
    type Metric = fn(&ConditionReport) -> (f64, f64);
    let metrics: [(&str, Metric); 5] = [
        ("M1", |r| (r.m1.mean, r.m1.se)),
        ("M2", |r| (r.m2.mean, r.m2.se)),
        ("D_total", |r| (r.d_total.mean, r.d_total.se)),
        ("D_layer", |r| (r.d_layer.mean, r.d_layer.se)),
        ("weak_gap_max", |r| (r.weak_gap_max, 0.0)),
    ];
    for (name, f) in metrics {
        let mut plot = Csv::new(hash, &["nu", name, "se"]).comment("x = nu on a log axis");
        for r in &report.reports {
            let (v, se) = f(r);
            plot.row([num(r.nu), num(v), num(se)]);
        }
        out.write_csv(&format!("plot_{name}.csv"), plot)?;
    }
    if let Some(c) = &report.corrector {
        write_corrector(c, hash, report.config.corrector.tolerance, out)?;
    }
    out.write_json("sweep.json", report)?;
    if report.monotonicity.flagged {
        println!("note: sweep flagged, metrics not monotone in nu: {:?}", report.monotonicity);
    }
    Ok(())
}

/// Writes the per-level summary, the residual series and `audit.json`.
pub fn write_audit(report: &AuditReport, out: &mut OutputDir) -> Result<()> {
    let hash = &report.config_hash;
    let mut levels = Csv::new(
        hash,
        &[
            "dt",
            "max_abs_R",
            "R_T",
            "R_T_se",
            "mean_abs_r_T",
            "mean_abs_r_T_se",
            "ito_max_z",
            "uniform_lhs",
            "uniform_rhs",
            "drift_T",
            "weak_gap_max",
        ],
    );
    for l in &report.levels {
        let weak = l.weak_max_gap.iter().fold(0.0f64, |m, e| m.max(e.mean));
        levels.row([
            num(l.dt),
            num(l.max_residual),
            num(l.final_residual.mean),
            num(l.final_residual.se),
            num(l.ito_final_abs.mean),
            num(l.ito_final_abs.se),
            num(l.ito.max_z()),
            num(l.uniform.lhs),
            num(l.uniform.rhs),
            num(l.drift_final),
            num(weak),
        ]);
        let mut series = Csv::new(hash, &["t", "R", "R_se", "drift"]);
        for j in 0..l.residual.times.len() {
            series.row([
                num(l.residual.times[j]),
                num(l.residual.mean[j]),
                num(l.residual.se[j]),
                num(l.residual.drift[j]),
            ]);
        }
        out.write_csv(&format!("energy_residual_dt{}.csv", l.dt), series)?;
        let mut ito = Csv::new(hash, &["t", "mean_pathwise", "expectation", "se", "z"]);
        for j in 0..l.ito.times.len() {
            ito.row([
                num(l.ito.times[j]),
                num(l.ito.mean_pathwise[j]),
                num(l.ito.expectation[j]),
                num(l.ito.se[j]),
                num(l.ito.z[j]),
            ]);
        }
        out.write_csv(&format!("ito_consistency_dt{}.csv", l.dt), ito)?;
    }
    out.write_csv("audit_levels.csv", levels)?;
    let mut orders = Csv::new(hash, &["quantity", "order"]);
    let slope = |f: Option<crate::stats::LineFit>| f.map_or(f64::NAN, |f| f.slope);
    orders.row(["max_abs_R".to_string(), num(slope(report.max_residual_order))]);
    orders.row(["R_T".to_string(), num(slope(report.final_residual_order))]);
    orders.row(["mean_abs_r_T".to_string(), num(slope(report.ito_order))]);
    for (i, o) in report.pair_orders.iter().enumerate() {
        orders.row([format!("max_abs_R_pair_{i}"), num(*o)]);
    }
    out.write_csv("audit_orders.csv", orders)?;
    out.write_json("audit.json", report)?;
    println!(
        "energy residual order {:.3}, Itô residual order {:.3}",
        slope(report.max_residual_order),
        slope(report.ito_order)
    );
    Ok(())
}

fn theorem6(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<i32> {
    let schedule = theorem6_schedule(cfg)?;
    let mut csv = Csv::new(&cfg.hash(), &["nu", "m", "approximant_gap", "perturbation"]);
    for i in 0..schedule.nu_list.len() {
        csv.row([
            num(schedule.nu_list[i]),
            num(schedule.m_list[i]),
            num(schedule.approximant_gaps[i]),
            num(schedule.perturbation_amplitudes[i]),
        ]);
    }
    out.write_csv("schedule.csv", csv)?;
    out.write_json("schedule.json", &Tagged { config_hash: &cfg.hash(), body: &schedule })?;
    let mut report = run_sweep(&schedule.config)?;
    // every output of one command carries the hash of the input file
    report.config_hash = cfg.hash();
    write_sweep(&report, out)?;
    if !schedule.converged {
        println!(
            "note: approximant gaps {:?} do not reach the threshold {:e}",
            schedule.approximant_gaps, schedule.threshold
        );
    }
    Ok(0)
}

fn theorem7(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<i32> {
    if cfg.physics.mode != Mode::Deterministic {
        return Err(LabError::config("theorem7 needs physics.mode = \"deterministic\""));
    }
    let report = run_sweep(cfg)?;
    write_sweep(&report, out)?;
    let s = stability_twins(cfg, TWIN_SEPARATION)?;
    if let Some(f) = &s.forced {
        write_bound(out, &report.config_hash, "gronwall_forced.csv", f)?;
    }
    out.write_json("stability.json", &s)?;
    Ok(0)
}
