//! Coupled schedules for rough initial data: the viscous runs start from
//! mollifications of the rough datum while the Euler reference starts from
//! the rough datum itself.

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, IcKindName, Mode};
use crate::dynamics::{make_initial_condition, IcKind};
use crate::error::{LabError, Result};
use crate::fields::l2_norm;

/// Which experiment a schedule amounts to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// Rough data with stochastic viscous runs.
    RoughStochastic,
    /// Rough data with deterministic viscous runs.
    RoughDeterministic,
    /// No rough part: smooth matched data.
    Smooth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem6Schedule {
    pub config: ExperimentConfig,
    pub kind: ScheduleKind,
    /// Viscosities and mollification indices in the configured order.
    pub nu_list: Vec<f64>,
    pub m_list: Vec<f64>,
    /// `amplitude nu^exponent` of the added perturbation, per viscosity.
    pub perturbation_amplitudes: Vec<f64>,
    /// `|u_0 - u_0^m|` per mollification index.
    pub approximant_gaps: Vec<f64>,
    pub threshold: f64,
    /// The gap of the largest index is below the threshold.
    pub converged: bool,
}

/// Derives the coupled experiment from a configuration with rough initial
/// data. `theorem6.m_list` is paired entrywise with the viscosities.
pub fn theorem6_schedule(config: &ExperimentConfig) -> Result<Theorem6Schedule> {
    config.validate()?;
    if config.initial.kind != IcKindName::Rough {
        return Err(LabError::config("the rough-data schedule needs initial.kind = \"rough\""));
    }
    let nu_list = config.nu_values();
    let m_list = config.theorem6.m_list.clone();
    if m_list.len() != nu_list.len() {
        return Err(LabError::config(format!(
            "theorem6.m_list has {} entries, nu_list has {}",
            m_list.len(),
            nu_list.len()
        )));
    }
    let grid = config.grid()?;
    let params = config.initial.params();
    let rough = make_initial_condition(IcKind::Rough, grid, &params)?;
    let approximant_gaps = m_list
        .iter()
        .map(|&m| Ok(l2_norm(&rough.sub(&make_initial_condition(IcKind::Mollified { m }, grid, &params)?)?)))
        .collect::<Result<Vec<_>>>()?;
    let largest = m_list
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("nonempty list");
    let threshold = config.theorem6.threshold;

    let mut derived = config.clone();
    let kind = if config.initial.rough_amplitude == 0.0 {
        derived.initial.kind = IcKindName::Smooth;
        derived.perturbation.mollify = None;
        ScheduleKind::Smooth
    } else {
        derived.perturbation.mollify = Some(m_list.clone());
        if config.physics.n_modes == 0 {
            ScheduleKind::RoughDeterministic
        } else {
            ScheduleKind::RoughStochastic
        }
    };
    if config.physics.n_modes == 0 {
        derived.physics.mode = Mode::Deterministic;
    }
    derived.validate()?;
    let p = &config.perturbation;
    Ok(Theorem6Schedule {
        kind,
        perturbation_amplitudes: nu_list.iter().map(|nu| p.amplitude * nu.powf(p.exponent)).collect(),
        converged: approximant_gaps[largest] < threshold,
        config: derived,
        nu_list,
        m_list,
        approximant_gaps,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rough(extra: &str) -> ExperimentConfig {
        let text = format!(
            "[grid]\nnx = 32\nny = 32\n[time]\nhorizon = 0.05\ndt = 0.01\n[physics]\nnu = 0.01\n\
             nu_list = [0.01, 0.005, 0.0025]\n{extra}\n[initial]\nkind = \"rough\"\nrough_amplitude = 0.2\n\
             rough_seed = 3\n[theorem6]\nm_list = [2.0, 6.0, 40.0]\nthreshold = 0.05\n"
        );
        ExperimentConfig::from_toml(&text).unwrap()
    }

    #[test]
    fn approximant_gaps_shrink_with_m() {
        let s = theorem6_schedule(&rough("n_modes = 2")).unwrap();
        assert_eq!(s.kind, ScheduleKind::RoughStochastic);
        assert!(s.approximant_gaps.windows(2).all(|w| w[1] < w[0]), "{:?}", s.approximant_gaps);
        assert!(s.converged);
        assert_eq!(s.config.perturbation.mollify.as_deref(), Some(&[2.0, 6.0, 40.0][..]));
    }

    #[test]
    fn zero_rough_amplitude_is_the_smooth_experiment() {
        let mut c = rough("n_modes = 2");
        c.initial.rough_amplitude = 0.0;
        let s = theorem6_schedule(&c).unwrap();
        assert_eq!(s.kind, ScheduleKind::Smooth);
        assert_eq!(s.config.initial.kind, IcKindName::Smooth);
        assert!(s.config.perturbation.mollify.is_none());
    }

    #[test]
    fn no_noise_gives_the_deterministic_experiment() {
        let s = theorem6_schedule(&rough("")).unwrap();
        assert_eq!(s.kind, ScheduleKind::RoughDeterministic);
        assert_eq!(s.config.physics.mode, Mode::Deterministic);
    }

    #[test]
    fn smooth_input_is_rejected() {
        let mut c = rough("");
        c.initial.kind = IcKindName::Smooth;
        assert!(matches!(theorem6_schedule(&c), Err(LabError::Config(_))));
    }
}
