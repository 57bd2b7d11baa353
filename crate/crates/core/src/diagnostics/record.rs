//! Per-path recording of every integrand the residuals and condition
//! functionals need.

use serde::{Deserialize, Serialize};

use super::reference::EulerTrajectory;
use crate::dynamics::{BrownianPath, ForcingSpec, NoiseModel, NsState, NsStepper, TimeGrid};
use crate::error::{LabError, Result};
use crate::fields::{
    divergence, grad_l2_layer_sq, h1_seminorm, l2_norm, trilinear_form, vector_laplacian, LayerRegion,
    VelocityField,
};

/// Divergence-free test field with vanishing wall trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestField {
    field: VelocityField,
}

impl TestField {
    /// Relative size of the extrapolated tangential wall value still accepted.
    pub const TRACE_TOLERANCE: f64 = 0.05;

    pub fn new(field: VelocityField) -> Result<Self> {
        let g = *field.grid();
        let (nx, ny) = (g.nx(), g.ny());
        let scale = field.max_abs();
        if field.wall_normal_max() > 0.0 {
            return Err(LabError::InvalidInput("test field has wall-normal velocity".into()));
        }
        let ux = field.ux();
        let mut trace = 0.0f64;
        for i in 0..nx {
            let bottom = 1.5 * ux[i] - 0.5 * ux[nx + i];
            let top = 1.5 * ux[(ny - 1) * nx + i] - 0.5 * ux[(ny - 2) * nx + i];
            trace = trace.max(bottom.abs()).max(top.abs());
        }
        if trace > Self::TRACE_TOLERANCE * scale {
            return Err(LabError::InvalidInput(format!(
                "test field does not vanish on the walls (trace {trace:e}, max {scale:e})"
            )));
        }
        let div = divergence(&field).max_abs();
        if div > 1e-9 * (1.0 + scale / g.min_spacing()) {
            return Err(LabError::InvalidInput(format!("test field is not divergence-free ({div:e})")));
        }
        Ok(Self { field })
    }

    pub fn field(&self) -> &VelocityField {
        &self.field
    }
}

/// Step-wise integrands of the weak formulation for one fixed test field
/// `phi0`: `<u, phi0>`, `<grad u, grad phi0>` and `b(u, phi0, u)`, plus the
/// constants `<sigma_k, phi0>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSeries {
    pub inner: Vec<f64>,
    pub grad_inner: Vec<f64>,
    pub advective: Vec<f64>,
    pub sigma_inner: Vec<f64>,
}

/// Data stored at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub index: usize,
    pub time: f64,
    /// `|u - u_bar|^2` against the reference, when one was supplied.
    pub gap_sq: Option<f64>,
    /// `<u, phi_j>` for each dictionary field.
    pub dictionary_inner: Vec<f64>,
    pub velocity: Option<VelocityField>,
}

/// Time series of one Navier-Stokes path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub nu: f64,
    /// Step actually used (after any automatic halving).
    pub dt: f64,
    pub halvings: u32,
    pub path_index: usize,
    pub path_seed: u64,
    pub nx: usize,
    pub ny: usize,
    pub n_modes: usize,
    pub times: Vec<f64>,
    /// `|u(t_j)|^2`.
    pub energy: Vec<f64>,
    /// `|grad u(t_j)|^2`.
    pub dissipation: Vec<f64>,
    /// `|grad u(t_j)|^2` restricted to the layer of width `layer_delta`.
    pub layer_dissipation: Vec<f64>,
    pub layer_delta: f64,
    pub layer_under_resolved: bool,
    /// Step-major `<u(t_j), sigma_k>`.
    pub cross: Vec<f64>,
    pub noise: BrownianPath,
    pub probes: Vec<ProbeSeries>,
    pub checkpoints: Vec<Checkpoint>,
    pub max_divergence: f64,
    pub max_solver_iterations: usize,
}

impl TrajectoryRecord {
    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("nonempty record")
    }

    /// `<u(t_j), sigma_k>`.
    pub fn cross_at(&self, j: usize) -> &[f64] {
        &self.cross[j * self.n_modes..(j + 1) * self.n_modes]
    }
}

/// What to record besides the scalar series.
#[derive(Debug, Clone, Default)]
pub struct RecordOptions<'a> {
    pub checkpoints: usize,
    pub layer_delta: f64,
    pub store_snapshots: bool,
    pub probes: &'a [TestField],
    pub dictionary: &'a [VelocityField],
    pub reference: Option<&'a EulerTrajectory>,
}

/// Identification of a path inside an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathMeta {
    pub path_index: usize,
    pub path_seed: u64,
    pub halvings: u32,
}

struct Recorder<'a> {
    opts: &'a RecordOptions<'a>,
    model: &'a NoiseModel,
    region: LayerRegion,
    checkpoint_at: Vec<usize>,
    next_checkpoint: usize,
    rec: TrajectoryRecord,
}

impl Recorder<'_> {
    fn observe(&mut self, j: usize, u: &VelocityField) -> Result<()> {
        let rec = &mut self.rec;
        rec.energy.push(l2_norm(u).powi(2));
        rec.dissipation.push(h1_seminorm(u).powi(2));
        rec.layer_dissipation.push(grad_l2_layer_sq(u, &self.region));
        rec.cross.extend(self.model.projections(u)?);
        rec.max_divergence = rec.max_divergence.max(divergence(u).max_abs());
        if !self.opts.probes.is_empty() {
            let lap = vector_laplacian(u);
            for (probe, test) in rec.probes.iter_mut().zip(self.opts.probes) {
                let phi = test.field();
                probe.inner.push(u.dot(phi)?);
                probe.grad_inner.push(-lap.dot(phi)?);
                probe.advective.push(trilinear_form(u, phi, u)?);
            }
        }
        if self.checkpoint_at.get(self.next_checkpoint) == Some(&j) {
            let c = self.next_checkpoint;
            let gap_sq = match self.opts.reference {
                Some(r) => Some(l2_norm(&u.sub(&r.velocities[c])?).powi(2)),
                None => None,
            };
            let dictionary_inner = self
                .opts
                .dictionary
                .iter()
                .map(|phi| u.dot(phi))
                .collect::<Result<Vec<_>>>()?;
            rec.checkpoints.push(Checkpoint {
                index: j,
                time: rec.times[j],
                gap_sq,
                dictionary_inner,
                velocity: self.opts.store_snapshots.then(|| u.clone()),
            });
            self.next_checkpoint += 1;
        }
        Ok(())
    }
}

/// Integrates one path on `time` with the increments of `path` and records
/// every diagnostic integrand.
pub fn record_trajectory(
    stepper: &mut NsStepper,
    model: &NoiseModel,
    u0: &VelocityField,
    time: &TimeGrid,
    path: &BrownianPath,
    forcing: &ForcingSpec,
    opts: &RecordOptions<'_>,
    meta: PathMeta,
) -> Result<TrajectoryRecord> {
    let g = *u0.grid();
    if path.n_steps() != time.n_steps() || path.n_modes() != model.n_modes() {
        return Err(LabError::config(format!(
            "noise path has {} steps x {} modes, expected {} x {}",
            path.n_steps(),
            path.n_modes(),
            time.n_steps(),
            model.n_modes()
        )));
    }
    let checkpoint_at = time.checkpoint_indices(opts.checkpoints);
    if let Some(r) = opts.reference {
        g.ensure_same(r.grid(), "reference trajectory")?;
        if r.velocities.len() != checkpoint_at.len() {
            return Err(LabError::config(format!(
                "reference has {} checkpoints, path expects {}",
                r.velocities.len(),
                checkpoint_at.len()
            )));
        }
    }
    let region = LayerRegion::new(&g, opts.layer_delta)?;
    let n = time.n_steps();
    let sigma_inner: Vec<Vec<f64>> = opts
        .probes
        .iter()
        .map(|p| model.projections(p.field()))
        .collect::<Result<_>>()?;
    let mut recorder = Recorder {
        opts,
        model,
        checkpoint_at,
        next_checkpoint: 0,
        rec: TrajectoryRecord {
            nu: stepper.nu(),
            dt: time.dt(),
            halvings: meta.halvings,
            path_index: meta.path_index,
            path_seed: meta.path_seed,
            nx: g.nx(),
            ny: g.ny(),
            n_modes: model.n_modes(),
            times: time.times(),
            energy: Vec::with_capacity(n + 1),
            dissipation: Vec::with_capacity(n + 1),
            layer_dissipation: Vec::with_capacity(n + 1),
            layer_delta: region.delta(),
            layer_under_resolved: !region.resolved(&g),
            cross: Vec::with_capacity((n + 1) * model.n_modes()),
            noise: path.clone(),
            probes: sigma_inner
                .into_iter()
                .map(|s| ProbeSeries {
                    inner: Vec::with_capacity(n + 1),
                    grad_inner: Vec::with_capacity(n + 1),
                    advective: Vec::with_capacity(n + 1),
                    sigma_inner: s,
                })
                .collect(),
            checkpoints: Vec::new(),
            max_divergence: 0.0,
            max_solver_iterations: 0,
        },
        region,
    };

    let mut state = NsState::new(u0.clone(), stepper.nu())?;
    recorder.observe(0, &state.velocity)?;
    for (j, &dt) in time.steps().iter().enumerate() {
        state = stepper.step(&state, dt, model, path.step(j), forcing)?;
        // pin the clock to the grid so checkpoint times are exact
        state.time = recorder.rec.times[j + 1];
        let it = stepper.last_stats().iterations;
        recorder.rec.max_solver_iterations = recorder.rec.max_solver_iterations.max(it);
        recorder.observe(j + 1, &state.velocity)?;
    }
    Ok(recorder.rec)
}
