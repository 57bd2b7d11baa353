//! Experiment configuration: a sectioned TOML document with defaults for
//! everything except the grid, the time grid and the base viscosity.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{IcKind, IcParams, StreamMode};
use crate::error::{LabError, Result};
use crate::fields::Grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "one")]
    pub length_x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub horizon: f64,
    pub dt: f64,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
    #[serde(default = "default_cfl")]
    pub cfl_limit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Stochastic,
    Deterministic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    /// Viscosity of single-path commands.
    pub nu: f64,
    /// Viscosities of a sweep; `[nu]` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_list: Option<Vec<f64>>,
    /// Layer constant `c` of `Gamma_{c nu}`.
    #[serde(default = "one")]
    pub layer_c: f64,
    #[serde(default)]
    pub n_modes: usize,
    #[serde(default)]
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    #[serde(default = "one_usize")]
    pub size: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self { size: 1, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IcKindName {
    #[default]
    Smooth,
    Rough,
    Mollified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub kind: IcKindName,
    /// Mollification index, required for `kind = "mollified"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default = "IcParams::default_modes")]
    pub modes: Vec<StreamMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2_amplitude: Option<f64>,
    #[serde(default = "default_decay")]
    pub decay: f64,
    #[serde(default)]
    pub rough_amplitude: f64,
    #[serde(default)]
    pub rough_seed: u64,
}

impl Default for InitialSection {
    fn default() -> Self {
        let p = IcParams::default();
        Self {
            kind: IcKindName::Smooth,
            m: None,
            modes: p.modes,
            l2_amplitude: p.l2_amplitude,
            decay: p.decay,
            rough_amplitude: p.rough_amplitude,
            rough_seed: p.rough_seed,
        }
    }
}

impl InitialSection {
    pub fn kind(&self) -> Result<IcKind> {
        Ok(match self.kind {
            IcKindName::Smooth => IcKind::Smooth,
            IcKindName::Rough => IcKind::Rough,
            IcKindName::Mollified => IcKind::Mollified {
                m: self
                    .m
                    .ok_or_else(|| LabError::config("initial.m is required for kind = \"mollified\""))?,
            },
        })
    }

    pub fn params(&self) -> IcParams {
        IcParams {
            modes: self.modes.clone(),
            l2_amplitude: self.l2_amplitude,
            decay: self.decay,
            rough_amplitude: self.rough_amplitude,
            rough_seed: self.rough_seed,
        }
    }
}

/// Coupling of the viscous initial data to the reference datum:
/// `u_0^nu = base(nu) + amplitude nu^exponent d` with a fixed unit direction
/// `d`, where `base(nu)` is the reference datum or, when `mollify` is set,
/// its mollification at the index paired with `nu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSection {
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "half")]
    pub exponent: f64,
    /// One mollification index per entry of `nu_list`, in the same order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mollify: Option<Vec<f64>>,
}

impl Default for PerturbationSection {
    fn default() -> Self {
        Self { amplitude: 0.0, exponent: 0.5, mollify: None }
    }
}

/// Deterministic body force
/// `f = amplitude cos(2 pi frequency t) phi_f` of the reference problem and
/// `f^nu = f + perturbation nu^perturbation_exponent g` of the viscous one,
/// with unit fields `phi_f = rot(sin(2 pi kx x / Lx) sin(ky pi y))` (normalized)
/// and a fixed unit `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSection {
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub frequency: f64,
    #[serde(default = "one_usize")]
    pub kx: usize,
    #[serde(default = "one_usize")]
    pub ky: usize,
    #[serde(default)]
    pub perturbation: f64,
    #[serde(default = "half")]
    pub perturbation_exponent: f64,
}

impl Default for ForcingSection {
    fn default() -> Self {
        Self {
            amplitude: 0.0,
            frequency: 0.0,
            kx: 1,
            ky: 1,
            perturbation: 0.0,
            perturbation_exponent: 0.5,
        }
    }
}

impl ForcingSection {
    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0 && self.perturbation == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrectorSection {
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    /// Step of the centered time difference of the corrector.
    #[serde(default = "default_corrector_dt")]
    pub dt: f64,
    /// Time at which the Euler snapshot is frozen.
    #[serde(default)]
    pub snapshot_time: f64,
    /// Whether slope failures make the check fail.
    #[serde(default = "yes")]
    pub hard: bool,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Attach a corrector table to sweep reports.
    #[serde(default)]
    pub in_sweep: bool,
}

impl Default for CorrectorSection {
    fn default() -> Self {
        Self {
            deltas: default_deltas(),
            dt: default_corrector_dt(),
            snapshot_time: 0.0,
            hard: true,
            tolerance: default_tolerance(),
            in_sweep: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem6Section {
    /// Mollification indices paired with `nu_list`.
    #[serde(default = "default_m_list")]
    pub m_list: Vec<f64>,
    /// Bound on `|u_0 - u_0^m|` for the largest `m`.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

impl Default for Theorem6Section {
    fn default() -> Self {
        Self { m_list: default_m_list(), threshold: default_threshold() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    /// Step sizes of the refinement study; each must divide the largest.
    #[serde(default = "default_dt_list")]
    pub dt_list: Vec<f64>,
    /// Test fields carried through the weak formulation.
    #[serde(default = "default_probes")]
    pub probes: usize,
}

impl Default for AuditSection {
    fn default() -> Self {
        Self { dt_list: default_dt_list(), probes: default_probes() }
    }
}

/// Everything that determines an experiment, seeds included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub time: TimeSection,
    pub physics: PhysicsSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub perturbation: PerturbationSection,
    #[serde(default)]
    pub forcing: ForcingSection,
    #[serde(default)]
    pub corrector: CorrectorSection,
    #[serde(default)]
    pub theorem6: Theorem6Section,
    #[serde(default)]
    pub audit: AuditSection,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn one_usize() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn default_checkpoints() -> usize {
    64
}
fn default_cfl() -> f64 {
    crate::dynamics::DEFAULT_CFL
}
fn default_decay() -> f64 {
    IcParams::default().decay
}
fn default_deltas() -> Vec<f64> {
    vec![0.125, 0.0625, 0.03125, 0.015625]
}
fn default_corrector_dt() -> f64 {
    5e-4
}
fn default_tolerance() -> f64 {
    0.2
}
fn default_m_list() -> Vec<f64> {
    vec![4.0, 8.0, 16.0, 32.0]
}
fn default_threshold() -> f64 {
    0.05
}
fn default_dt_list() -> Vec<f64> {
    vec![4e-3, 2e-3, 1e-3]
}
fn default_probes() -> usize {
    2
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(LabError::config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let msg = e.to_string();
            if msg.contains("missing field `physics`") {
                LabError::config(format!("{msg}\nthe [physics] table with the viscosity `nu` is required"))
            } else {
                LabError::config(msg)
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// First 64 bits of the SHA-256 of the canonical TOML rendering, in hex.
    /// Keys are sorted and defaults are filled, so equivalent files hash
    /// alike.
    pub fn hash(&self) -> String {
        let value = toml::Value::try_from(self).expect("configuration serializes");
        let text = toml::to_string(&value).expect("configuration serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.nx, self.grid.ny, self.grid.length_x)
    }

    /// Viscosities of a sweep in the order given.
    pub fn nu_values(&self) -> Vec<f64> {
        self.physics.nu_list.clone().unwrap_or_else(|| vec![self.physics.nu])
    }

    /// Number of noise modes actually driven.
    pub fn effective_modes(&self) -> usize {
        match self.physics.mode {
            Mode::Stochastic => self.physics.n_modes,
            Mode::Deterministic => 0,
        }
    }

    /// Structural checks; the CFL precheck needs fields and happens when an
    /// experiment is built.
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        positive("time.horizon", self.time.horizon)?;
        positive("time.dt", self.time.dt)?;
        positive("time.cfl_limit", self.time.cfl_limit)?;
        if self.time.checkpoints == 0 {
            return Err(LabError::config("time.checkpoints must be at least 1"));
        }
        positive("physics.nu", self.physics.nu)?;
        positive("physics.layer_c", self.physics.layer_c)?;
        let nus = self.nu_values();
        if nus.is_empty() {
            return Err(LabError::config("physics.nu_list must not be empty"));
        }
        for nu in &nus {
            positive("physics.nu_list entries", *nu)?;
        }
        let mut sorted = nus.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(LabError::config("physics.nu_list entries must be distinct"));
        }
        if self.ensemble.size == 0 {
            return Err(LabError::config("ensemble.size must be at least 1"));
        }
        match self.physics.mode {
            Mode::Deterministic if self.physics.n_modes > 0 => {
                return Err(LabError::config(
                    "physics.n_modes must be 0 in deterministic mode",
                ))
            }
            Mode::Stochastic if !self.forcing.is_zero() => {
                return Err(LabError::config(
                    "a body force requires physics.mode = \"deterministic\"",
                ))
            }
            _ => {}
        }
        self.initial.kind()?;
        if let Some(m) = self.initial.m {
            positive("initial.m", m)?;
        }
        if let Some(list) = &self.perturbation.mollify {
            if list.len() != nus.len() {
                return Err(LabError::config(format!(
                    "perturbation.mollify has {} entries, nu_list has {}",
                    list.len(),
                    nus.len()
                )));
            }
            for m in list {
                positive("perturbation.mollify entries", *m)?;
            }
        }
        if !self.perturbation.exponent.is_finite() || !self.forcing.perturbation_exponent.is_finite() {
            return Err(LabError::config("perturbation exponents must be finite"));
        }
        if self.corrector.deltas.len() < 4 {
            return Err(LabError::config("corrector.deltas needs at least 4 widths"));
        }
        for d in &self.corrector.deltas {
            positive("corrector.deltas entries", *d)?;
        }
        positive("corrector.dt", self.corrector.dt)?;
        positive("corrector.tolerance", self.corrector.tolerance)?;
        for m in &self.theorem6.m_list {
            positive("theorem6.m_list entries", *m)?;
        }
        positive("theorem6.threshold", self.theorem6.threshold)?;
        self.audit_ratios()?;
        Ok(())
    }

    /// `dt_max / dt_i` for the audit step sizes, each a positive integer.
    pub fn audit_ratios(&self) -> Result<Vec<usize>> {
        let list = &self.audit.dt_list;
        if list.len() < 2 {
            return Err(LabError::config("audit.dt_list needs at least 2 step sizes"));
        }
        for dt in list {
            positive("audit.dt_list entries", *dt)?;
        }
        let finest = list.iter().cloned().fold(f64::INFINITY, f64::min);
        list.iter()
            .map(|dt| {
                let r = dt / finest;
                let k = r.round();
                if (r - k).abs() > 1e-9 * r {
                    Err(LabError::config(format!(
                        "audit.dt_list entry {dt} is not an integer multiple of {finest}"
                    )))
                } else {
                    Ok(k as usize)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[grid]\nnx = 16\nny = 16\n[time]\nhorizon = 0.1\ndt = 0.01\n[physics]\nnu = 0.01\n";

    #[test]
    fn defaults_fill_optional_sections() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.time.checkpoints, 64);
        assert_eq!(c.ensemble.size, 1);
        assert_eq!(c.nu_values(), vec![0.01]);
        assert_eq!(c.physics.mode, Mode::Stochastic);
    }

    #[test]
    fn missing_nu_is_named() {
        let text = MINIMAL.replace("nu = 0.01\n", "layer_c = 1.0\n");
        let err = ExperimentConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("`nu`"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}bogus = 3\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn hash_ignores_layout_and_key_order() {
        let a = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let shuffled = "[physics]\nnu   = 0.01\n\n[time]\ndt = 0.01\nhorizon = 0.1\n[grid]\nny = 16\nnx = 16\n";
        let b = ExperimentConfig::from_toml(shuffled).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
        let mut c = a.clone();
        c.ensemble.seed = 1;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn round_trips_through_toml() {
        let mut a = ExperimentConfig::from_toml(MINIMAL).unwrap();
        a.physics.nu_list = Some(vec![0.01, 0.005]);
        a.perturbation.mollify = Some(vec![4.0, 8.0]);
        let b = ExperimentConfig::from_toml(&a.to_toml()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn inconsistent_settings_are_config_errors() {
        let base = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let mut c = base.clone();
        c.physics.nu_list = Some(vec![0.01, 0.01]);
        assert!(matches!(c.validate(), Err(LabError::Config(_))));
        let mut c = base.clone();
        c.forcing.amplitude = 1.0;
        assert!(matches!(c.validate(), Err(LabError::Config(_))));
        let mut c = base.clone();
        c.physics.mode = Mode::Deterministic;
        c.physics.n_modes = 2;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.audit.dt_list = vec![3e-3, 2e-3];
        assert!(c.validate().is_err());
        let mut c = base;
        c.initial.kind = IcKindName::Mollified;
        assert!(c.validate().is_err());
    }
}
