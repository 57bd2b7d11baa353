//! Path runner and viscosity sweep.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::corrector::{corrector_scaling_report, ScalingReport};
use crate::diagnostics::{
    record_trajectory, run_euler, test_dictionary, ConditionReport, EulerTrajectory, PathMeta, RecordOptions,
    TestField, TrajectoryRecord,
};
use crate::dynamics::{
    courant, initial_stream, make_initial_condition, make_noise_modes, perturbation_direction, sample_path_on,
    stream_from_modes, BrownianPath, EulerState, EulerStepper, ForcingSpec, ForcingTerm, IcKind, NoiseModel,
    NsStepper, StreamMode, TimeGrid,
};
use crate::error::{LabError, Result};
use crate::fields::{l2_norm, rot, BoundaryKind, Grid, SolveMethod, VelocityField};

/// Automatic step halvings allowed after a CFL failure.
pub const MAX_HALVINGS: u32 = 3;

/// One viscosity of a sweep with its position in the configured list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViscosityEntry {
    pub nu: f64,
    /// Position in `physics.nu_list` as written; `None` for ad hoc values.
    pub input_index: Option<usize>,
    /// Mollification index of the viscous initial datum.
    pub mollify: Option<f64>,
}

/// Seed bookkeeping of one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathKey {
    pub nu: f64,
    pub nu_index: usize,
    pub path_index: usize,
    pub master_seed: u64,
    pub path_seed: u64,
}

/// Seed of the Brownian stream of a path. It ignores the viscosity, so
/// every viscosity sees the same increments for a given path index.
pub fn path_seed(path_index: usize) -> u64 {
    path_index as u64
}

/// Built experiment: grid, noise model, reference datum and forces, and the
/// lazily computed Euler references of every halving level.
#[derive(Debug)]
pub struct Experiment {
    config: ExperimentConfig,
    grid: Grid,
    entries: Vec<ViscosityEntry>,
    model: NoiseModel,
    euler: EulerStepper,
    reference_state: EulerState,
    reference_force: ForcingSpec,
    force_field: Option<VelocityField>,
    direction: VelocityField,
    dictionary: Vec<VelocityField>,
    probes: Vec<TestField>,
    checkpoints: usize,
    references: Vec<OnceLock<std::result::Result<EulerTrajectory, ReferenceFailure>>>,
}

#[derive(Debug, Clone)]
enum ReferenceFailure {
    StepSize { courant: f64, limit: f64 },
    Other(String),
}

impl From<LabError> for ReferenceFailure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::StepSize { courant, limit } => ReferenceFailure::StepSize { courant, limit },
            e => ReferenceFailure::Other(e.to_string()),
        }
    }
}

fn unit_force_field(grid: Grid, kx: usize, ky: usize) -> Result<VelocityField> {
    let psi = stream_from_modes(grid, &[StreamMode { kx, ky, amplitude: 1.0, cosine: false }]);
    let f = rot(&psi)?;
    let n = l2_norm(&f);
    if n == 0.0 {
        return Err(LabError::config(format!("forcing mode ({kx}, {ky}) vanishes on this grid")));
    }
    Ok(f.scaled(1.0 / n))
}

impl Experiment {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid()?;
        let mut entries: Vec<ViscosityEntry> = config
            .nu_values()
            .into_iter()
            .enumerate()
            .map(|(i, nu)| ViscosityEntry {
                nu,
                input_index: Some(i),
                mollify: config.perturbation.mollify.as_ref().map(|m| m[i]),
            })
            .collect();
        entries.sort_by(|a, b| b.nu.total_cmp(&a.nu));

        let model = make_noise_modes(grid, config.effective_modes())?.with_seed(config.ensemble.seed);
        let euler = EulerStepper::new(grid, SolveMethod::Direct)?.with_cfl_limit(config.time.cfl_limit);
        let psi = initial_stream(config.initial.kind()?, grid, &config.initial.params())?;
        let reference_state = euler.from_stream(&psi, 0.0)?;
        let c = courant(&reference_state.velocity, config.time.dt);
        if c > config.time.cfl_limit {
            return Err(LabError::config(format!(
                "time.dt = {} violates the CFL limit on the reference datum (courant {c:.4} > {})",
                config.time.dt, config.time.cfl_limit
            )));
        }
        let f = &config.forcing;
        let force_field = if f.is_zero() { None } else { Some(unit_force_field(grid, f.kx, f.ky)?) };
        let reference_force = match &force_field {
            Some(phi) if f.amplitude != 0.0 => ForcingSpec::single(ForcingTerm::new(phi.clone(), f.amplitude, f.frequency)),
            _ => ForcingSpec::zero(),
        };
        let direction = rot(&perturbation_direction(grid)?)?;
        let dictionary = test_dictionary(grid)?;
        let level0 = TimeGrid::new(config.time.horizon, config.time.dt)?;
        let checkpoints = config.time.checkpoints.min(level0.n_steps().max(1));
        let exp = Self {
            config: config.clone(),
            grid,
            entries,
            model,
            euler,
            reference_state,
            reference_force,
            force_field,
            direction,
            dictionary,
            probes: Vec::new(),
            checkpoints,
            references: (0..=MAX_HALVINGS).map(|_| OnceLock::new()).collect(),
        };
        for e in &exp.entries {
            let u0 = exp.initial_for(e)?;
            let c = courant(&u0, config.time.dt);
            if c > config.time.cfl_limit {
                return Err(LabError::config(format!(
                    "time.dt = {} violates the CFL limit on the datum for nu = {} (courant {c:.4})",
                    config.time.dt, e.nu
                )));
            }
        }
        Ok(exp)
    }

    /// Records the first `n` dictionary fields as weak-formulation probes.
    pub fn with_probes(mut self, n: usize) -> Result<Self> {
        if n > self.dictionary.len() {
            return Err(LabError::config(format!(
                "at most {} probes are available, asked for {n}",
                self.dictionary.len()
            )));
        }
        self.probes = self.dictionary[..n].iter().cloned().map(TestField::new).collect::<Result<_>>()?;
        Ok(self)
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Sweep viscosities in decreasing order.
    pub fn entries(&self) -> &[ViscosityEntry] {
        &self.entries
    }

    pub fn model(&self) -> &NoiseModel {
        &self.model
    }

    pub fn probes(&self) -> &[TestField] {
        &self.probes
    }

    pub fn dictionary(&self) -> &[VelocityField] {
        &self.dictionary
    }

    pub fn reference_state(&self) -> &EulerState {
        &self.reference_state
    }

    pub fn reference_force(&self) -> &ForcingSpec {
        &self.reference_force
    }

    pub fn euler_stepper(&self) -> &EulerStepper {
        &self.euler
    }

    /// Checkpoint count actually used (at most the number of base steps).
    pub fn checkpoints(&self) -> usize {
        self.checkpoints
    }

    /// The configured entry for `nu`, or an unperturbed ad hoc entry.
    pub fn entry_for(&self, nu: f64) -> ViscosityEntry {
        self.entries
            .iter()
            .find(|e| e.nu == nu)
            .copied()
            .unwrap_or(ViscosityEntry { nu, input_index: None, mollify: None })
    }

    /// `u_0^nu`.
    pub fn initial_for(&self, entry: &ViscosityEntry) -> Result<VelocityField> {
        let base = match entry.mollify {
            Some(m) => make_initial_condition(IcKind::Mollified { m }, self.grid, &self.config.initial.params())?,
            None => self.reference_state.velocity.clone(),
        };
        let p = &self.config.perturbation;
        let eps = p.amplitude * entry.nu.powf(p.exponent);
        let mut u0 = base.with_bc(BoundaryKind::NoSlip);
        if eps != 0.0 {
            u0.axpy_in_place(eps, &self.direction)?;
        }
        Ok(u0)
    }

    /// `f^nu = f + perturbation nu^exponent g`.
    pub fn force_for(&self, entry: &ViscosityEntry) -> ForcingSpec {
        let f = &self.config.forcing;
        let eps = f.perturbation * entry.nu.powf(f.perturbation_exponent);
        if eps == 0.0 {
            return self.reference_force.clone();
        }
        let g = ForcingTerm::new(self.direction.clone(), eps, 0.0);
        if self.reference_force.terms().is_empty() {
            ForcingSpec::single(g)
        } else {
            self.reference_force.perturbed(g)
        }
    }

    pub fn force_field(&self) -> Option<&VelocityField> {
        self.force_field.as_ref()
    }

    /// Time grid of halving level `h`.
    pub fn time_grid(&self, halvings: u32) -> Result<TimeGrid> {
        TimeGrid::new(self.config.time.horizon, self.config.time.dt / f64::from(1u32 << halvings))
    }

    /// Euler reference on the time grid of halving level `h`.
    pub fn reference(&self, halvings: u32) -> Result<&EulerTrajectory> {
        let slot = self
            .references
            .get(halvings as usize)
            .ok_or_else(|| LabError::config(format!("halving level {halvings} exceeds {MAX_HALVINGS}")))?;
        let computed = slot.get_or_init(|| {
            let time = self.time_grid(halvings)?;
            Ok(run_euler(&self.euler, &self.reference_state, &time, self.checkpoints, &self.reference_force)?)
        });
        computed.as_ref().map_err(|e| match e {
            ReferenceFailure::StepSize { courant, limit } => LabError::StepSize { courant: *courant, limit: *limit },
            ReferenceFailure::Other(msg) => LabError::Numerical(format!("euler reference failed: {msg}")),
        })
    }

    /// Brownian increments of a path on the finest halving level.
    pub fn finest_path(&self, path_index: usize) -> Result<BrownianPath> {
        let time = self.time_grid(MAX_HALVINGS)?;
        Ok(sample_path_on(self.model.seed(), self.model.n_modes(), time.steps(), path_seed(path_index)))
    }

    fn attempt(&self, entry: &ViscosityEntry, path_index: usize, fine: &BrownianPath, halvings: u32) -> Result<TrajectoryRecord> {
        let time = self.time_grid(halvings)?;
        let path = fine.coarsen(1 << (MAX_HALVINGS - halvings));
        if path.n_steps() != time.n_steps() {
            return Err(LabError::config(format!(
                "horizon {} is not resolved consistently by dt / {}",
                self.config.time.horizon,
                1u32 << MAX_HALVINGS
            )));
        }
        let reference = self.reference(halvings)?;
        let mut stepper = NsStepper::new(self.grid, entry.nu, SolveMethod::Direct)?.with_cfl_limit(self.config.time.cfl_limit);
        let opts = RecordOptions {
            checkpoints: self.checkpoints,
            layer_delta: (self.config.physics.layer_c * entry.nu).min(0.5),
            store_snapshots: false,
            probes: &self.probes,
            dictionary: &self.dictionary,
            reference: Some(reference),
        };
        let meta = PathMeta { path_index, path_seed: path_seed(path_index), halvings };
        record_trajectory(
            &mut stepper,
            &self.model,
            &self.initial_for(entry)?,
            &time,
            &path,
            &self.force_for(entry),
            &opts,
            meta,
        )
    }

    /// Simulates one path, halving the step after a CFL failure at most
    /// [`MAX_HALVINGS`] times.
    pub fn run_path(&self, entry: &ViscosityEntry, path_index: usize) -> Result<TrajectoryRecord> {
        let fine = self.finest_path(path_index)?;
        let mut halvings = 0;
        loop {
            match self.attempt(entry, path_index, &fine, halvings) {
                Err(LabError::StepSize { .. }) if halvings < MAX_HALVINGS => halvings += 1,
                other => return other,
            }
        }
    }

    /// Euler state at `time`, integrated with the base step.
    pub fn euler_snapshot(&self, time: f64) -> Result<EulerState> {
        let grid = TimeGrid::new(time, self.config.time.dt)?;
        let mut state = self.reference_state.clone();
        for &dt in grid.steps() {
            state = self.euler.step(&state, dt, &self.reference_force)?;
        }
        state.time = time;
        Ok(state)
    }
}

/// Simulates path `path_index` at viscosity `nu`.
pub fn run_path(config: &ExperimentConfig, nu: f64, path_index: usize) -> Result<TrajectoryRecord> {
    let exp = Experiment::new(config)?;
    let entry = exp.entry_for(nu);
    exp.run_path(&entry, path_index)
}

/// A path that could not be completed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFailure {
    pub nu: f64,
    pub path_index: usize,
    pub error: String,
}

/// Monotonicity of the sweep as the viscosity decreases. Not implied by
/// the asymptotic statements, so a violation only flags the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityFlags {
    pub m2_nonincreasing: bool,
    pub d_layer_nonincreasing: bool,
    pub flagged: bool,
}

impl MonotonicityFlags {
    pub fn of(reports: &[ConditionReport]) -> Self {
        let m2 = reports.windows(2).all(|w| w[1].m2.mean <= w[0].m2.mean);
        let dl = reports.windows(2).all(|w| w[1].d_layer.mean <= w[0].d_layer.mean);
        Self { m2_nonincreasing: m2, d_layer_nonincreasing: dl, flagged: !(m2 && dl) }
    }
}

/// Solver statistics accumulated over a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub max_divergence: f64,
    pub max_solver_iterations: usize,
    /// Paths that needed at least one halving, per viscosity.
    pub halved_paths: Vec<usize>,
    pub reference_grad_bound: f64,
    pub reference_energy_drift: f64,
}

/// Everything a sweep produces apart from wall-clock time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config_hash: String,
    pub config: ExperimentConfig,
    /// One report per viscosity, in decreasing viscosity.
    pub reports: Vec<ConditionReport>,
    pub monotonicity: MonotonicityFlags,
    pub key_map: Vec<PathKey>,
    pub failures: Vec<PathFailure>,
    pub solver: SolverSummary,
    pub corrector: Option<ScalingReport>,
}

impl SweepReport {
    /// Hard invariants of every row.
    pub fn invariants_hold(&self) -> bool {
        self.reports.iter().all(ConditionReport::invariants_hold)
    }
}

fn is_path_failure(e: &LabError) -> bool {
    matches!(
        e,
        LabError::StepSize { .. } | LabError::Numerical(_) | LabError::SolverNotConverged { .. }
    )
}

/// Runs every (viscosity, path) pair and assembles the condition reports.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepReport> {
    let exp = Experiment::new(config)?;
    run_sweep_with(&exp)
}

pub fn run_sweep_with(exp: &Experiment) -> Result<SweepReport> {
    let config = exp.config();
    let m = config.ensemble.size;
    let reference = (0..=MAX_HALVINGS)
        .find_map(|h| exp.reference(h).ok())
        .ok_or_else(|| LabError::SweepFailed("the euler reference fails at every step size".into()))?;
    let tasks: Vec<(usize, usize)> = (0..exp.entries().len())
        .flat_map(|e| (0..m).map(move |p| (e, p)))
        .collect();
    let outcomes: Vec<Result<TrajectoryRecord>> = tasks
        .par_iter()
        .map(|&(e, p)| exp.run_path(&exp.entries()[e], p))
        .collect();

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    let mut halved_paths = Vec::new();
    let mut max_divergence = 0.0f64;
    let mut max_iter = 0;
    let mut outcomes = outcomes.into_iter();
    for entry in exp.entries() {
        let mut records = Vec::with_capacity(m);
        let mut failed = 0;
        for p in 0..m {
            match outcomes.next().expect("one outcome per task") {
                Ok(r) => records.push(r),
                Err(e) if is_path_failure(&e) => {
                    failed += 1;
                    failures.push(PathFailure { nu: entry.nu, path_index: p, error: e.to_string() });
                }
                Err(e) => return Err(e),
            }
        }
        if records.is_empty() {
            return Err(LabError::SweepFailed(format!("all {m} paths failed at nu = {}", entry.nu)));
        }
        halved_paths.push(records.iter().filter(|r| r.halvings > 0).count());
        for r in &records {
            max_divergence = max_divergence.max(r.max_divergence);
            max_iter = max_iter.max(r.max_solver_iterations);
        }
        reports.push(ConditionReport::assemble(
            &records,
            reference,
            exp.dictionary(),
            config.physics.layer_c,
            failed,
        )?);
    }

    let key_map = exp
        .entries()
        .iter()
        .flat_map(|e| {
            (0..m).map(move |p| PathKey {
                nu: e.nu,
                nu_index: e.input_index.unwrap_or(usize::MAX),
                path_index: p,
                master_seed: config.ensemble.seed,
                path_seed: path_seed(p),
            })
        })
        .collect();
    let corrector = if config.corrector.in_sweep {
        let snap = exp.euler_snapshot(config.corrector.snapshot_time)?;
        Some(corrector_scaling_report(&snap, &config.corrector.deltas, config.corrector.dt)?)
    } else {
        None
    };
    Ok(SweepReport {
        config_hash: config.hash(),
        config: config.clone(),
        monotonicity: MonotonicityFlags::of(&reports),
        reports,
        key_map,
        failures,
        solver: SolverSummary {
            max_divergence,
            max_solver_iterations: max_iter,
            halved_paths,
            reference_grad_bound: reference.grad_bound,
            reference_energy_drift: reference.relative_energy_drift(),
        },
        corrector,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::NsState;

    fn small(extra: &str) -> ExperimentConfig {
        let text = format!(
            "[grid]\nnx = 16\nny = 16\n[time]\nhorizon = 0.05\ndt = 0.01\ncheckpoints = 5\n[physics]\nnu = 0.02\n{extra}"
        );
        ExperimentConfig::from_toml(&text).unwrap()
    }

    #[test]
    fn paths_are_reproducible_and_distinct() {
        let cfg = small("n_modes = 2\n");
        let a = run_path(&cfg, 0.02, 3).unwrap();
        let b = run_path(&cfg, 0.02, 3).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = run_path(&cfg, 0.02, 4).unwrap();
        assert_ne!(a.noise.increments(), c.noise.increments());
    }

    #[test]
    fn increments_are_shared_across_viscosities() {
        let cfg = small("n_modes = 2\nnu_list = [0.02, 0.01]\n");
        let exp = Experiment::new(&cfg).unwrap();
        let a = exp.run_path(&exp.entries()[0], 1).unwrap();
        let b = exp.run_path(&exp.entries()[1], 1).unwrap();
        assert_eq!(a.noise, b.noise);
        assert!(a.energy != b.energy);
    }

    #[test]
    fn deterministic_path_matches_the_solver() {
        let cfg = small("");
        let rec = run_path(&cfg, 0.02, 0).unwrap();
        let exp = Experiment::new(&cfg).unwrap();
        let mut st = NsStepper::new(*exp.grid(), 0.02, SolveMethod::Direct).unwrap();
        let mut s = NsState::new(exp.initial_for(&exp.entry_for(0.02)).unwrap(), 0.02).unwrap();
        let time = exp.time_grid(0).unwrap();
        for (j, &dt) in time.steps().iter().enumerate() {
            s = st.step(&s, dt, exp.model(), &[], &ForcingSpec::zero()).unwrap();
            assert_eq!(rec.energy[j + 1], l2_norm(&s.velocity).powi(2));
        }
    }

    #[test]
    fn growing_flow_triggers_halving() {
        // a steady force accelerates the flow past the base-step CFL limit
        let cfg = small("mode = \"deterministic\"\n[initial]\nl2_amplitude = 0.01\n[forcing]\namplitude = 60.0\n");
        let exp = Experiment::new(&cfg).unwrap();
        let rec = exp.run_path(&exp.entry_for(0.02), 0).unwrap();
        assert!(rec.halvings >= 1, "halvings {}", rec.halvings);
        assert_eq!(rec.n_steps(), exp.time_grid(rec.halvings).unwrap().n_steps());
        assert!(matches!(exp.attempt(&exp.entry_for(0.02), 0, &exp.finest_path(0).unwrap(), 0), Err(LabError::StepSize { .. })));
    }

    #[test]
    fn single_viscosity_sweep_is_degenerate() {
        let cfg = small("");
        let report = run_sweep(&cfg).unwrap();
        assert_eq!(report.reports.len(), 1);
        let r = &report.reports[0];
        assert_eq!(r.paths_used, 1);
        assert_eq!(r.m1.se, 0.0);
        assert!(r.invariants_hold());
        assert!(!report.monotonicity.flagged);
    }

    #[test]
    fn permuted_viscosities_give_identical_rows() {
        let a = run_sweep(&small("n_modes = 2\nnu_list = [0.02, 0.01, 0.04]\n[ensemble]\nsize = 2\n")).unwrap();
        let b = run_sweep(&small("n_modes = 2\nnu_list = [0.01, 0.04, 0.02]\n[ensemble]\nsize = 2\n")).unwrap();
        assert_eq!(
            serde_json::to_string(&a.reports).unwrap(),
            serde_json::to_string(&b.reports).unwrap()
        );
        assert_eq!(a.reports[0].nu, 0.04);
        assert_eq!(a.key_map.len(), 6);
    }
}
