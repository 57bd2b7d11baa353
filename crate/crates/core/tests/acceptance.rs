//! Acceptance run: one PASS/FAIL line per criterion on the shipped configs.
//! Exits nonzero if any criterion fails.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use common::{brute_force_trilinear, kkt_projection, random_field, skewness_defect};
use inviscid_lab::corrector::corrector_scaling_report;
use inviscid_lab::diagnostics::BoundCheck;
use inviscid_lab::ensemble::{energy_audit, euler_energy, run_sweep, stability_twins, Experiment, ExperimentConfig};
use inviscid_lab::fields::{l2_norm, trilinear_form, BoundaryKind, Grid, Projector, SolveMethod};
use inviscid_lab::stats::log_log_fit;

/// Verdict, a one-line summary and the serialized outputs of a criterion.
struct Outcome {
    pass: bool,
    detail: String,
    bytes: Vec<u8>,
}

type Check = fn() -> Result<Outcome, String>;

fn load(name: &str) -> Result<ExperimentConfig, String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    ExperimentConfig::from_toml(&text).map_err(|e| e.to_string())
}

fn json<T: serde::Serialize>(v: &T) -> Vec<u8> {
    serde_json::to_vec(v).expect("reports serialize")
}

fn corrector_scalings() -> Result<Outcome, String> {
    let cfg = load("corrector.toml")?;
    let exp = Experiment::new(&cfg).map_err(|e| e.to_string())?;
    let snap = exp.euler_snapshot(cfg.corrector.snapshot_time).map_err(|e| e.to_string())?;
    let report = corrector_scaling_report(&snap, &cfg.corrector.deltas, cfg.corrector.dt).map_err(|e| e.to_string())?;
    let bands = [
        ("v_l2", 0.35, 0.65),
        ("dtv_l2", 0.35, 0.65),
        ("grad_l2", -0.65, -0.35),
        ("grad_linf", -1.2, -0.8),
        ("rho2_grad_linf", 0.8, 1.2),
        ("rho_grad_l2", 0.35, 0.65),
        ("v_linf", -0.1, 0.1),
        ("rho_grad_linf", -0.2, 0.2),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, lo, hi) in bands {
        let s = report
            .slopes
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| format!("no slope for {name}"))?;
        let ok = (lo..=hi).contains(&s.fit.slope);
        pass &= ok;
        parts.push(format!("{name}={:+.3}{}", s.fit.slope, if ok { "" } else { "!" }));
    }
    Ok(Outcome { pass, detail: parts.join(" "), bytes: json(&report) })
}

fn audit_bytes() -> Result<(inviscid_lab::ensemble::AuditReport, Vec<u8>), String> {
    let report = energy_audit(&load("energy.toml")?).map_err(|e| e.to_string())?;
    let bytes = json(&report);
    Ok((report, bytes))
}

fn energy_equality() -> Result<Outcome, String> {
    let (r, bytes) = audit_bytes()?;
    let order = r.max_residual_order.as_ref().map_or(f64::NAN, |f| f.slope);
    let exact = r.levels.iter().all(|l| l.drift_final == l.drift_nominal);
    Ok(Outcome {
        pass: order >= 0.8 && exact,
        detail: format!(
            "order of max|R| = {order:.3} (pairs {:?}), drift equals t nu N exactly: {exact}",
            r.pair_orders.iter().map(|p| format!("{p:.2}")).collect::<Vec<_>>()
        ),
        bytes,
    })
}

fn ito_formula() -> Result<Outcome, String> {
    let (r, bytes) = audit_bytes()?;
    let order = r.ito_order.as_ref().map_or(f64::NAN, |f| f.slope);
    let enough = r.levels.iter().all(|l| l.ito.times.len() >= 64);
    let within = r.levels.iter().all(|l| l.ito.within(3.0));
    let zs: Vec<String> = r.levels.iter().map(|l| format!("{:.2}", l.ito.max_z())).collect();
    Ok(Outcome {
        pass: within && enough && order >= 0.5,
        detail: format!("max z per dt = [{}], order of E|r(T)| = {order:.3}", zs.join(", ")),
        bytes,
    })
}

fn projection_oracle() -> Result<Outcome, String> {
    let g = Grid::unit(8).map_err(|e| e.to_string())?;
    let proj = Projector::new(g, SolveMethod::Direct).map_err(|e| e.to_string())?;
    let f = random_field(g, 2024, BoundaryKind::Free);
    let fast = proj.project(&f).map_err(|e| e.to_string())?;
    let err = fast.sub(&kkt_projection(&f)).map_err(|e| e.to_string())?.max_abs();
    let g16 = Grid::new(16, 12, 1.0).map_err(|e| e.to_string())?;
    let proj16 = Projector::new(g16, SolveMethod::Direct).map_err(|e| e.to_string())?;
    let mut worst_idem = 0.0f64;
    let mut contractive = true;
    for seed in 0..100 {
        let f = random_field(g16, seed, BoundaryKind::Free);
        let pf = proj16.project(&f).map_err(|e| e.to_string())?;
        let ppf = proj16.project(&pf).map_err(|e| e.to_string())?;
        worst_idem = worst_idem.max(ppf.sub(&pf).map_err(|e| e.to_string())?.max_abs());
        contractive &= l2_norm(&pf) <= l2_norm(&f) * (1.0 + 1e-12);
    }
    Ok(Outcome {
        pass: err <= 1e-10 && worst_idem <= 1e-10 && contractive,
        detail: format!("8x8 KKT error {err:.2e}, idempotence {worst_idem:.2e}, contraction {contractive}"),
        bytes: format!("{err:e} {worst_idem:e} {contractive}").into_bytes(),
    })
}

fn trilinear_antisymmetry() -> Result<Outcome, String> {
    let ns = [32usize, 64, 128];
    let hs: Vec<f64> = ns.iter().map(|n| 1.0 / *n as f64).collect();
    let defects: Vec<f64> = ns.iter().map(|n| skewness_defect(*n)).collect();
    let order = log_log_fit(&hs, &defects, 0.95).map_or(f64::NAN, |f| f.slope);
    let g = Grid::unit(8).map_err(|e| e.to_string())?;
    let a = random_field(g, 1, BoundaryKind::NoPenetration);
    let b = random_field(g, 2, BoundaryKind::NoPenetration);
    let c = random_field(g, 3, BoundaryKind::NoPenetration);
    let gap = (trilinear_form(&a, &b, &c).map_err(|e| e.to_string())? - brute_force_trilinear(&a, &b, &c)).abs();
    Ok(Outcome {
        pass: order >= 1.0 && gap <= 1e-12,
        detail: format!("defect order {order:.3} over 32/64/128, 8x8 oracle gap {gap:.2e}"),
        bytes: format!("{defects:?} {gap:e}").into_bytes(),
    })
}

fn euler_conservation() -> Result<Outcome, String> {
    let cfg = load("euler.toml")?;
    let r = euler_energy(&cfg).map_err(|e| e.to_string())?;
    Ok(Outcome {
        pass: r.relative_energy_drift <= 1e-4,
        detail: format!("relative energy drift {:.2e} at T = {}", r.relative_energy_drift, r.horizon),
        bytes: json(&r),
    })
}

fn bound_holds(b: &BoundCheck) -> bool {
    b.lhs.iter().zip(&b.rhs).all(|(l, r)| *l <= 1.1 * r)
}

fn gronwall_stability() -> Result<Outcome, String> {
    let free = stability_twins(&load("euler.toml")?, 1e-3).map_err(|e| e.to_string())?;
    let forced = stability_twins(&load("theorem7.toml")?, 1e-3).map_err(|e| e.to_string())?;
    let f = forced.forced.as_ref().ok_or("the forced configuration has no force")?;
    Ok(Outcome {
        pass: bound_holds(&free.unforced) && bound_holds(f) && (free.separation - 1e-3).abs() < 1e-12,
        detail: format!(
            "unforced worst lhs/rhs {:.3e}, forced worst lhs/rhs {:.3e}",
            free.unforced.worst_ratio, f.worst_ratio
        ),
        bytes: [json(&free), json(&forced)].concat(),
    })
}

fn sweep_sanity() -> Result<Outcome, String> {
    let report = run_sweep(&load("sweep.toml")?).map_err(|e| e.to_string())?;
    let rows = report.reports.len();
    let flags = report.monotonicity;
    Ok(Outcome {
        pass: rows == 4 && report.invariants_hold(),
        detail: format!(
            "{rows} rows, M2 >= M1 and D_total >= D_layer: {}; monotone M2 {} D_layer {} (soft, flagged {})",
            report.invariants_hold(),
            flags.m2_nonincreasing,
            flags.d_layer_nonincreasing,
            flags.flagged
        ),
        bytes: json(&report),
    })
}

const CHECKS: [(&str, Check); 8] = [
    ("corrector scalings", corrector_scalings),
    ("energy equality", energy_equality),
    ("Ito formula", ito_formula),
    ("projection oracle", projection_oracle),
    ("trilinear antisymmetry", trilinear_antisymmetry),
    ("Euler energy conservation", euler_conservation),
    ("Gronwall stability", gronwall_stability),
    ("viscosity sweep sanity", sweep_sanity),
];

fn main() {
    let mut failed = 0;
    let mut first_bytes = Vec::new();
    for (k, (name, check)) in CHECKS.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(o) => {
                println!("{} criterion {}: {name}: {} [{secs:.1} s]", verdict(o.pass), k + 1, o.detail);
                failed += usize::from(!o.pass);
                first_bytes.push(Some(o.bytes));
            }
            Err(e) => {
                println!("FAIL criterion {}: {name}: error: {e} [{secs:.1} s]", k + 1);
                failed += 1;
                first_bytes.push(None);
            }
        }
    }

    let start = Instant::now();
    let mut differing = Vec::new();
    for (k, (_, check)) in CHECKS.iter().enumerate() {
        let again = check().ok().map(|o| o.bytes);
        if again.is_none() || again != first_bytes[k] {
            differing.push(k + 1);
        }
    }
    let same = differing.is_empty();
    failed += usize::from(!same);
    println!(
        "{} criterion 9: determinism: second run of criteria 1-8 byte-identical: {} [{:.1} s]",
        verdict(same),
        if same { "all".to_string() } else { format!("differs for {differing:?}") },
        start.elapsed().as_secs_f64()
    );

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}
