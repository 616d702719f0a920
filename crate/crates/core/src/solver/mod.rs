//! Finite-volume solver for `∂_t c + ∂_y J = r(c)` on `[0, L]` with
//! zero-flux walls.
//!
//! Each interior face carries the Maxwell-Stefan flux evaluated at the
//! arithmetic mean of the adjacent compositions. Time stepping is explicit
//! Euler with a step chosen from the largest eigenvalue of the diffusion
//! operator over all faces, capped further by the reaction rates.

mod field;
mod reaction;

use nalgebra::DVector;
use rayon::prelude::*;

pub use field::{Field, Grid1D, ISOBARIC_TOL};
pub use reaction::{Reaction, ReactionNetwork};

use crate::error::{Error, Result};
use crate::mixture::{Composition, DrivingForce, FluxSet, MixtureSpec, NEGATIVE_CLAMP};
use crate::mskernel::{general_eigenvalues, FluxOperator, COMPOSITION_FLOOR};
use crate::thermo::{chemical_potentials, convexity_check, gamma_matrix_unchecked, gibbs_density_limit, ThermoModel};

/// Largest fractional change of a concentration that reactions may cause in
/// one step.
pub const REACTION_STEP_CAP: f64 = 0.1;

/// Faces are evaluated in parallel from this many cells on.
const PAR_THRESHOLD: usize = 64;

/// Time-integration controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub t_end: f64,
    /// Fraction of the explicit diffusion limit `h²/(2 λ_max)`.
    pub cfl_safety: f64,
    /// Record a checkpoint every this many steps (the final state is always recorded).
    pub checkpoint_every: usize,
    pub max_steps: usize,
    /// Composition floor used when assembling face matrices.
    pub floor: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { t_end: 1.0, cfl_safety: 0.4, checkpoint_every: 100, max_steps: 10_000_000, floor: COMPOSITION_FLOOR }
    }
}

impl SimConfig {
    pub fn with_t_end(t_end: f64) -> Self {
        Self { t_end, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidInput(format!("t_end = {} must be positive", self.t_end)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidInput(format!("cfl_safety = {} must lie in (0, 1]", self.cfl_safety)));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::InvalidInput("checkpoint_every must be at least 1".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidInput("max_steps must be at least 1".into()));
        }
        if !(self.floor > 0.0 && self.floor < 1e-3) {
            return Err(Error::InvalidInput(format!("composition floor {} out of range", self.floor)));
        }
        Ok(())
    }
}

/// Per-face quantities at one instant.
#[derive(Debug, Clone)]
struct FaceEval {
    flux: FluxSet,
    /// Largest real part of the diffusion operator spectrum at the face.
    lambda_max: Option<f64>,
}

fn check_field(field: &Field, spec: &MixtureSpec) -> Result<()> {
    if field.nspecies() != spec.n() {
        return Err(Error::BadDimension(format!(
            "field has {} species, mixture has {}",
            field.nspecies(),
            spec.n()
        )));
    }
    Ok(())
}

/// Face composition (mean of neighbours, floored) and mole-fraction gradient.
fn face_state(field: &Field, face: usize, floor: f64) -> Result<(Composition, DVector<f64>)> {
    let left = field.composition(face - 1)?;
    let right = field.composition(face)?;
    let h = field.grid().h();
    let mean = (left.x() + right.x()) * 0.5;
    let c_tot = 0.5 * (left.c_tot() + right.c_tot());
    let comp = Composition::normalized(mean, c_tot)?.floored(floor);
    let grad = crate::linalg::project_zero_sum(&((right.x() - left.x()) / h));
    Ok((comp, grad))
}

fn eval_face(field: &Field, spec: &MixtureSpec, face: usize, floor: f64, with_spectrum: bool) -> Result<FaceEval> {
    let (comp, grad) = face_state(field, face, floor)?;
    let op = FluxOperator::new(&comp, &spec.dmat)?;
    let gamma = gamma_matrix_unchecked(&spec.thermo, op.x());
    let d = match spec.thermo {
        ThermoModel::Ideal => DrivingForce::projected(grad),
        _ => DrivingForce::projected(&gamma.0 * grad),
    };
    let flux = op.fluxes(&d)?;
    let lambda_max = if with_spectrum {
        // ideal mixtures are always strictly convex
        if !matches!(spec.thermo, ThermoModel::Ideal) {
            let lam = convexity_check(&spec.thermo, &comp);
            if !(lam > 0.0) {
                return Err(Error::NotConvex { min_eigenvalue: lam });
            }
        }
        let ev = general_eigenvalues(&op.diffusion_matrix(&gamma.0)?)?;
        Some(ev[0].re)
    } else {
        None
    };
    Ok(FaceEval { flux, lambda_max })
}

fn eval_faces(field: &Field, spec: &MixtureSpec, floor: f64, with_spectrum: bool) -> Result<Vec<FaceEval>> {
    check_field(field, spec)?;
    let n = field.nspecies();
    let nfaces = field.ncells() + 1;
    let boundary = || FaceEval { flux: FluxSet::zeros(n), lambda_max: None };
    let interior = |f: usize| eval_face(field, spec, f, floor, with_spectrum);
    let inner: Vec<FaceEval> = if field.ncells() >= PAR_THRESHOLD {
        (1..nfaces - 1).into_par_iter().map(interior).collect::<Result<_>>()?
    } else {
        (1..nfaces - 1).map(interior).collect::<Result<_>>()?
    };
    let mut faces = Vec::with_capacity(nfaces);
    faces.push(boundary());
    faces.extend(inner);
    faces.push(boundary());
    Ok(faces)
}

/// Fluxes on all `ncells + 1` faces; the two wall faces carry zero flux.
pub fn face_fluxes(field: &Field, spec: &MixtureSpec) -> Result<Vec<FluxSet>> {
    face_fluxes_with_floor(field, spec, COMPOSITION_FLOOR)
}

pub fn face_fluxes_with_floor(field: &Field, spec: &MixtureSpec, floor: f64) -> Result<Vec<FluxSet>> {
    Ok(eval_faces(field, spec, floor, false)?.into_iter().map(|f| f.flux).collect())
}

fn diffusive_dt(faces: &[FaceEval], h: f64, safety: f64) -> f64 {
    let lambda = faces.iter().filter_map(|f| f.lambda_max).fold(0.0_f64, f64::max);
    if lambda > 0.0 {
        safety * h * h / (2.0 * lambda)
    } else {
        f64::INFINITY
    }
}

fn reaction_dt(field: &Field, reactions: &ReactionNetwork) -> f64 {
    if reactions.is_empty() {
        return f64::INFINITY;
    }
    let mut r = vec![0.0; field.nspecies()];
    let mut dt = f64::INFINITY;
    for k in 0..field.ncells() {
        let c = field.cell(k);
        reactions.rates_into(c, &mut r);
        let total = field.cell_total(k);
        for (ci, ri) in c.iter().zip(&r) {
            // consumption is bounded by the species itself, production by the cell total
            let room = if *ri < 0.0 { *ci } else { total };
            if *ri != 0.0 && room > 0.0 {
                dt = dt.min(REACTION_STEP_CAP * room / ri.abs());
            }
        }
    }
    dt
}

/// Explicit-Euler update from precomputed face fluxes.
fn apply_update(
    field: &Field,
    fluxes: &[FluxSet],
    reactions: &ReactionNetwork,
    dt: f64,
) -> Result<Field> {
    let n = field.nspecies();
    let h = field.grid().h();
    let time = field.time() + dt;
    let mut c = field.data().to_vec();
    let mut r = vec![0.0; n];
    for k in 0..field.ncells() {
        let old = field.cell(k);
        reactions.rates_into(old, &mut r);
        let (left, right) = (&fluxes[k], &fluxes[k + 1]);
        let total = field.cell_total(k);
        for i in 0..n {
            let v = old[i] + dt * ((left[i] - right[i]) / h + r[i]);
            if v < 0.0 {
                if v < -NEGATIVE_CLAMP * total {
                    return Err(Error::PositivityViolation { cell: k, species: i, value: v, time });
                }
                c[k * n + i] = 0.0;
            } else {
                c[k * n + i] = v;
            }
        }
    }
    Ok(Field::from_raw(*field.grid(), n, c, time))
}

/// One explicit step of size `dt`.
///
/// Negative values below `−1e-10 · c_tot` raise [`Error::PositivityViolation`];
/// smaller ones are rounding noise and are clamped to zero.
pub fn step(field: &Field, spec: &MixtureSpec, reactions: &ReactionNetwork, dt: f64) -> Result<Field> {
    if reactions.nspecies() != spec.n() {
        return Err(Error::BadDimension("reaction network and mixture disagree on species count".into()));
    }
    let fluxes = face_fluxes(field, spec)?;
    apply_update(field, &fluxes, reactions, dt)
}

/// Largest stable step: `cfl_safety · h² / (2 λ_max)` from the diffusion
/// operator, further limited so reactions change no concentration by more
/// than 10 %.
pub fn stable_dt(field: &Field, spec: &MixtureSpec, reactions: &ReactionNetwork, config: &SimConfig) -> Result<f64> {
    let faces = eval_faces(field, spec, config.floor, true)?;
    Ok(diffusive_dt(&faces, field.grid().h(), config.cfl_safety).min(reaction_dt(field, reactions)))
}

/// `V = Σ_cells G(c_k) h`, with `0 ln 0 = 0`.
pub fn gibbs_functional(field: &Field, model: &ThermoModel) -> f64 {
    let h = field.grid().h();
    (0..field.ncells()).map(|k| gibbs_density_limit(model, field.cell(k))).sum::<f64>() * h
}

/// `W = −Σ_faces Σ_i J_i (μ_i,right − μ_i,left)`, the exact rate at which the
/// semi-discrete scheme dissipates `V` without reactions.
pub fn dissipation(field: &Field, spec: &MixtureSpec, fluxes: &[FluxSet]) -> Result<f64> {
    let mu: Vec<DVector<f64>> = (0..field.ncells())
        .map(|k| {
            let comp = field.composition(k)?;
            chemical_potentials(&spec.thermo, comp.x())
        })
        .collect::<Result<_>>()?;
    let mut w = 0.0;
    for f in 1..field.ncells() {
        let dmu = &mu[f] - &mu[f - 1];
        w -= fluxes[f].as_vector().dot(&dmu);
    }
    Ok(w)
}

/// Snapshot recorded during a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub step: usize,
    pub time: f64,
    pub field: Field,
    /// `∫ c_i dx` per species.
    pub masses: Vec<f64>,
    /// Gibbs functional `V`.
    pub entropy: f64,
    /// Dissipation `W`; `None` where some concentration is exactly zero.
    pub dissipation: Option<f64>,
    /// `∫_0^t W` by the trapezoid rule over every time step; `None` once any
    /// step had no defined `W`.
    pub dissipated: Option<f64>,
    pub min_concentration: f64,
}

impl Checkpoint {
    /// Snapshot of `field` with `W` and `∫W` left undetermined.
    pub fn new(step: usize, field: Field, model: &ThermoModel) -> Self {
        Self {
            step,
            time: field.time(),
            masses: field.masses(),
            entropy: gibbs_functional(&field, model),
            dissipation: None,
            dissipated: None,
            min_concentration: field.min_concentration(),
            field,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub names: Vec<String>,
    pub checkpoints: Vec<Checkpoint>,
    /// Number of time steps taken.
    pub steps: usize,
    /// Whether the run included reaction terms.
    pub reactive: bool,
}

impl Trajectory {
    pub fn last(&self) -> &Checkpoint {
        self.checkpoints.last().expect("a trajectory always holds the initial state")
    }

    pub fn first(&self) -> &Checkpoint {
        &self.checkpoints[0]
    }
}

/// Running trapezoid integral of `W` over the steps taken so far.
#[derive(Debug)]
struct DissipationIntegral {
    total: Option<f64>,
    last: Option<(Option<f64>, f64)>,
}

impl DissipationIntegral {
    fn new() -> Self {
        Self { total: Some(0.0), last: None }
    }

    /// `w` is the dissipation of the current state, `dt` the step about to be
    /// taken from it (zero at the end of the run).
    fn advance(&mut self, w: Option<f64>, dt: f64) {
        if let Some((w_prev, dt_prev)) = self.last {
            self.total = match (self.total, w_prev, w) {
                (Some(t), Some(a), Some(b)) => Some(t + 0.5 * dt_prev * (a + b)),
                _ => None,
            };
        }
        self.last = Some((w, dt));
    }
}

/// Drives a field from `t = 0` to `t_end`.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    spec: &'a MixtureSpec,
    reactions: &'a ReactionNetwork,
    config: SimConfig,
}

impl<'a> Simulator<'a> {
    pub fn new(spec: &'a MixtureSpec, reactions: &'a ReactionNetwork, config: SimConfig) -> Result<Self> {
        config.validate()?;
        if reactions.nspecies() != spec.n() {
            return Err(Error::BadDimension("reaction network and mixture disagree on species count".into()));
        }
        Ok(Self { spec, reactions, config })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn run(&self, initial: &Field) -> Result<Trajectory> {
        check_field(initial, self.spec)?;
        let model = &self.spec.thermo;
        let t_end = self.config.t_end;
        let mut field = initial.clone();
        let mut checkpoints = vec![Checkpoint::new(0, field.clone(), model)];
        let mut steps = 0usize;
        let mut integral = DissipationIntegral::new();
        // the newest checkpoint still needs W from the fluxes of its own state
        let mut pending = true;

        loop {
            let finished = field.time() >= t_end;
            if !finished && steps >= self.config.max_steps {
                return Err(Error::MaxStepsExceeded { max_steps: self.config.max_steps, time: field.time() });
            }
            let faces = eval_faces(&field, self.spec, self.config.floor, !finished)?;
            let fluxes: Vec<FluxSet> = faces.iter().map(|f| f.flux.clone()).collect();
            let w = dissipation(&field, self.spec, &fluxes).ok();
            let dt = if finished {
                0.0
            } else {
                let dt_stable = diffusive_dt(&faces, field.grid().h(), self.config.cfl_safety)
                    .min(reaction_dt(&field, self.reactions));
                let remaining = t_end - field.time();
                // avoid a sliver of a final step
                if dt_stable >= remaining || remaining - dt_stable < 1e-9 * t_end {
                    remaining
                } else {
                    dt_stable
                }
            };
            integral.advance(w, dt);
            if pending {
                let cp = checkpoints.last_mut().expect("non-empty");
                cp.dissipation = w;
                cp.dissipated = integral.total;
                pending = false;
            }
            if finished {
                break;
            }
            let remaining = t_end - field.time();
            let mut next = apply_update(&field, &fluxes, self.reactions, dt)?;
            steps += 1;
            let done = dt == remaining;
            if done {
                next = Field::from_raw(*next.grid(), next.nspecies(), next.data().to_vec(), t_end);
            }
            field = next;
            if done || steps % self.config.checkpoint_every == 0 {
                checkpoints.push(Checkpoint::new(steps, field.clone(), model));
                pending = true;
            }
        }
        Ok(Trajectory { names: self.spec.names.clone(), checkpoints, steps, reactive: !self.reactions.is_empty() })
    }
}

/// Runs [`Simulator::run`] with the given configuration.
pub fn simulate(
    initial: &Field,
    spec: &MixtureSpec,
    reactions: &ReactionNetwork,
    config: &SimConfig,
) -> Result<Trajectory> {
    Simulator::new(spec, reactions, config.clone())?.run(initial)
}
