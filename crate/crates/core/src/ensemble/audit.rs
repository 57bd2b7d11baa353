//! Energy audit: energy equality, Itô formula, uniform energy bound and
//! weak formulation on a ladder of step sizes sharing the same noise.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::{path_seed, Experiment};
use crate::diagnostics::{
    energy_equality_residual, ito_consistency, ito_residual, record_trajectory, uniform_energy_check,
    weak_formulation_residual, ItoConsistency, PathMeta, RecordOptions, ResidualSeries, TimeProfile,
    TrajectoryRecord, UniformEnergyCheck, BDG_CONSTANT,
};
use crate::dynamics::{sample_path_on, NsStepper, TimeGrid};
use crate::error::{LabError, Result};
use crate::fields::SolveMethod;
use crate::stats::{log_log_fit, Estimate, LineFit};

/// Diagnostics of one step size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditLevel {
    pub dt: f64,
    pub n_steps: usize,
    /// `R(t)` of the energy equality on the whole time grid.
    pub residual: ResidualSeries,
    /// `max_t |R(t)|`.
    pub max_residual: f64,
    /// `R(T)`.
    pub final_residual: Estimate,
    /// Drift input at `T` as computed and as `T nu N`.
    pub drift_final: f64,
    pub drift_nominal: f64,
    pub ito: ItoConsistency,
    /// `E|r(T)|` of the pathwise Itô residual.
    pub ito_final_abs: Estimate,
    pub uniform: UniformEnergyCheck,
    /// Per probe, the ensemble mean of `max_t` weak-formulation gap.
    pub weak_max_gap: Vec<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub config_hash: String,
    pub nu: f64,
    pub n_modes: usize,
    pub ensemble_size: usize,
    /// Levels in decreasing step size.
    pub levels: Vec<AuditLevel>,
    /// Log-log fits against `dt` over all levels.
    pub max_residual_order: Option<LineFit>,
    pub final_residual_order: Option<LineFit>,
    pub ito_order: Option<LineFit>,
    /// `log2`-type observed orders of `max_t |R|` between consecutive levels.
    pub pair_orders: Vec<f64>,
}

const FIT_CONFIDENCE: f64 = 0.95;

/// Runs the audit at `physics.nu` for every `audit.dt_list` step. The
/// increments of each path are drawn on the smallest step and summed to
/// the larger ones.
pub fn energy_audit(config: &ExperimentConfig) -> Result<AuditReport> {
    let ratios = config.audit_ratios()?;
    let exp = Experiment::new(config)?.with_probes(config.audit.probes)?;
    let nu = config.physics.nu;
    let entry = exp.entry_for(nu);
    let finest = config.audit.dt_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let fine_time = TimeGrid::new(config.time.horizon, finest)?;
    let m = config.ensemble.size;
    let model = exp.model();
    let u0 = exp.initial_for(&entry)?;
    let force = exp.force_for(&entry);

    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|a, b| ratios[*b].cmp(&ratios[*a]));
    let mut levels = Vec::with_capacity(order.len());
    for &l in &order {
        let dt = config.audit.dt_list[l];
        let time = TimeGrid::new(config.time.horizon, dt)?;
        let checkpoints = config.time.checkpoints.min(time.n_steps().max(1));
        let records = (0..m)
            .into_par_iter()
            .map(|p| -> Result<TrajectoryRecord> {
                let fine = sample_path_on(model.seed(), model.n_modes(), fine_time.steps(), path_seed(p));
                let path = fine.coarsen(ratios[l]);
                if path.n_steps() != time.n_steps() {
                    return Err(LabError::config(format!(
                        "step {dt} does not tile the horizon like the finest step {finest}"
                    )));
                }
                let mut stepper =
                    NsStepper::new(*exp.grid(), nu, SolveMethod::Direct)?.with_cfl_limit(config.time.cfl_limit);
                let probes = exp.probes();
                let opts = RecordOptions {
                    checkpoints,
                    layer_delta: (config.physics.layer_c * nu).min(0.5),
                    store_snapshots: false,
                    probes,
                    dictionary: &[],
                    reference: None,
                };
                let meta = PathMeta { path_index: p, path_seed: path_seed(p), halvings: 0 };
                record_trajectory(&mut stepper, model, &u0, &time, &path, &force, &opts, meta)
            })
            .collect::<Result<Vec<_>>>()?;

        let residual = energy_equality_residual(&records, model)?;
        let n = time.n_steps();
        let cps = time.checkpoint_indices(checkpoints);
        let ito = ito_consistency(&records, model, &cps)?;
        let finals: Vec<f64> = records
            .iter()
            .map(|r| Ok(ito_residual(r, model)?[n].abs()))
            .collect::<Result<_>>()?;
        let uniform = uniform_energy_check(&records, model, BDG_CONSTANT)?;
        let profile = TimeProfile::Cosine { frequency: 1.0 / config.time.horizon };
        let weak_max_gap = (0..exp.probes().len())
            .map(|k| {
                let gaps = records
                    .iter()
                    .map(|r| Ok(weak_formulation_residual(r, k, profile)?.max_gap()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Estimate::from_samples(&gaps))
            })
            .collect::<Result<Vec<_>>>()?;
        let final_column: Vec<f64> = {
            let e0: Vec<f64> = records.iter().map(|r| r.energy[0]).collect();
            let dissipated: Vec<f64> = records
                .iter()
                .map(|r| crate::stats::trapezoid(&r.times, &r.dissipation))
                .collect();
            let q = residual.drift[n];
            records
                .iter()
                .enumerate()
                .map(|(i, r)| r.energy[n] + 2.0 * nu * dissipated[i] - e0[i] - q)
                .collect()
        };
        levels.push(AuditLevel {
            dt,
            n_steps: n,
            max_residual: residual.max_abs(),
            final_residual: Estimate::from_samples(&final_column),
            drift_final: residual.drift[n],
            drift_nominal: config.time.horizon * (nu * model.n_modes() as f64),
            residual,
            ito,
            ito_final_abs: Estimate::from_samples(&finals),
            uniform,
            weak_max_gap,
        });
    }

    let dts: Vec<f64> = levels.iter().map(|l| l.dt).collect();
    let fit = |v: Vec<f64>| log_log_fit(&dts, &v, FIT_CONFIDENCE);
    let pair_orders = levels
        .windows(2)
        .map(|w| crate::stats::observed_order(w[0].dt, w[0].max_residual, w[1].dt, w[1].max_residual))
        .collect();
    Ok(AuditReport {
        config_hash: config.hash(),
        nu,
        n_modes: model.n_modes(),
        ensemble_size: m,
        max_residual_order: fit(levels.iter().map(|l| l.max_residual).collect()),
        final_residual_order: fit(levels.iter().map(|l| l.final_residual.mean.abs()).collect()),
        ito_order: fit(levels.iter().map(|l| l.ito_final_abs.mean).collect()),
        pair_orders,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn audit_levels_share_noise_and_report_drift() {
        let text = "[grid]\nnx = 16\nny = 16\n[time]\nhorizon = 0.04\ndt = 0.01\ncheckpoints = 4\n\
                    [physics]\nnu = 0.02\nn_modes = 2\n[ensemble]\nsize = 3\n[audit]\ndt_list = [0.01, 0.005]\n";
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        let a = energy_audit(&cfg).unwrap();
        assert_eq!(a.levels.len(), 2);
        assert_eq!(a.levels[0].dt, 0.01);
        assert_eq!(a.levels[1].n_steps, 8);
        for l in &a.levels {
            assert_eq!(l.drift_final, l.drift_nominal);
            assert_eq!(l.weak_max_gap.len(), 2);
        }
        assert_eq!(a.pair_orders.len(), 1);
        let b = energy_audit(&cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
