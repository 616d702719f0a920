//! Independent checks on kernel and solver output.
//!
//! * [`entropy_ledger`]: the Gibbs functional `V` and the dissipation `W`
//!   along a trajectory, and the Lyapunov inequality `V(t) + ∫W ≤ V(0)`.
//! * [`filtration_oracle`]: a scalar solver for the binary reduction
//!   `∂_t c = ∂_yy φ(c)` that shares no code with the MS kernel.
//! * [`detect_uphill`]: reverse and osmotic diffusion events.
//! * [`ternary_closed_forms`]: analytic determinant and trace of `B` for three
//!   species.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mixture::{Composition, MixtureSpec};
use crate::mskernel::{assemble_b, general_eigenvalues};
use crate::solver::{dissipation, face_fluxes, gibbs_functional, Field, Grid1D, Trajectory};
use crate::thermo::ThermoModel;

/// `W ≥ −W_TOL·|V(0)|` at every checkpoint.
pub const W_TOL: f64 = 1e-10;
/// `V + ∫W ≤ V(0) + LYAPUNOV_TOL·|V(0)|`.
pub const LYAPUNOV_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerRow {
    pub time: f64,
    pub v: f64,
    pub w: f64,
    pub cumulative_w: f64,
    pub min_concentration: f64,
    pub masses: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViolationKind {
    NegativeDissipation { w: f64 },
    LyapunovExceeded { excess: f64 },
}

/// First checkpoint at which the ledger fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerViolation {
    pub checkpoint: usize,
    pub time: f64,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyLedger {
    pub rows: Vec<LedgerRow>,
    pub v0: f64,
    /// `false` for reactive runs, where `V` is not a Lyapunov function of the
    /// diffusion part alone and only the rows are reported.
    pub checked: bool,
    pub violation: Option<LedgerViolation>,
}

impl EntropyLedger {
    pub fn is_ok(&self) -> bool {
        self.violation.is_none()
    }

    /// `max_t |V(t) + ∫_0^t W − V(0)|`.
    pub fn max_slack(&self) -> f64 {
        self.rows.iter().map(|r| (r.v + r.cumulative_w - self.v0).abs()).fold(0.0, f64::max)
    }

    /// `max_t (V(t) + ∫_0^t W − V(0))`, positive when the balance is exceeded.
    pub fn max_excess(&self) -> f64 {
        self.rows.iter().map(|r| r.v + r.cumulative_w - self.v0).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Recomputes `V` and `W` at every checkpoint and checks the Lyapunov couple.
///
/// `∫W` is taken from the step-resolved trapezoid sums recorded by the
/// simulator when every checkpoint carries one; otherwise it falls back to the
/// trapezoid rule over checkpoint times.
pub fn entropy_ledger(trajectory: &Trajectory, spec: &MixtureSpec) -> Result<EntropyLedger> {
    let cps = &trajectory.checkpoints;
    if cps.is_empty() {
        return Err(Error::InvalidInput("empty trajectory".into()));
    }
    let mut w = Vec::with_capacity(cps.len());
    for cp in cps {
        let fluxes = face_fluxes(&cp.field, spec)?;
        let value = dissipation(&cp.field, spec, &fluxes).map_err(|_| {
            Error::DegenerateComposition(format!(
                "dissipation undefined at t = {}: some concentration is exactly zero",
                cp.time
            ))
        })?;
        w.push(value);
    }
    let step_resolved: Option<Vec<f64>> = cps.iter().map(|cp| cp.dissipated).collect();
    let cumulative = match step_resolved {
        Some(c) => c,
        None => {
            let mut acc = 0.0;
            let mut out = vec![0.0];
            for k in 1..cps.len() {
                acc += 0.5 * (cps[k].time - cps[k - 1].time) * (w[k] + w[k - 1]);
                out.push(acc);
            }
            out
        }
    };

    let rows: Vec<LedgerRow> = cps
        .iter()
        .zip(w.iter().zip(&cumulative))
        .map(|(cp, (&w, &cum))| LedgerRow {
            time: cp.time,
            v: gibbs_functional(&cp.field, &spec.thermo),
            w,
            cumulative_w: cum,
            min_concentration: cp.field.min_concentration(),
            masses: cp.field.masses(),
        })
        .collect();
    let v0 = rows[0].v;
    let checked = !trajectory.reactive;
    let mut violation = None;
    if checked {
        for (k, r) in rows.iter().enumerate() {
            let kind = if r.w < -W_TOL * v0.abs() {
                Some(ViolationKind::NegativeDissipation { w: r.w })
            } else if r.v + r.cumulative_w > v0 + LYAPUNOV_TOL * v0.abs() {
                Some(ViolationKind::LyapunovExceeded { excess: r.v + r.cumulative_w - v0 })
            } else {
                None
            };
            if let Some(kind) = kind {
                violation = Some(LedgerViolation { checkpoint: k, time: r.time, kind });
                break;
            }
        }
    }
    Ok(EntropyLedger { rows, v0, checked, violation })
}

/// Binary interaction parameter of a two-species model; the linear part of the
/// excess Gibbs energy does not affect diffusion.
fn binary_interaction(model: &ThermoModel) -> Result<f64> {
    match model {
        ThermoModel::Ideal => Ok(0.0),
        ThermoModel::Margules { a } => {
            if a.nrows() != 2 || a.ncols() != 2 {
                return Err(Error::BadDimension(format!("binary oracle got a {}x{} Margules matrix", a.nrows(), a.ncols())));
            }
            Ok(0.5 * (a[(0, 1)] + a[(1, 0)]) - 0.5 * (a[(0, 0)] + a[(1, 1)]))
        }
    }
}

/// The scalar flux potential `φ` of the binary filtration equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxPotential {
    pub d12: f64,
    pub interaction: f64,
    pub c_tot: f64,
}

impl FluxPotential {
    pub fn new(model: &ThermoModel, d12: f64, c_tot: f64) -> Result<Self> {
        if !(d12 > 0.0) {
            return Err(Error::InvalidInput(format!("Đ12 = {d12} must be positive")));
        }
        if !(c_tot > 0.0) {
            return Err(Error::NonPositiveTotal { total: c_tot });
        }
        Ok(Self { d12, interaction: binary_interaction(model)?, c_tot })
    }

    /// `φ(c) = Đ (c − a c²/c_tot + (2a/3) c³/c_tot²)`.
    pub fn phi(&self, c: f64) -> f64 {
        let (a, ct) = (self.interaction, self.c_tot);
        self.d12 * (c - a * c * c / ct + 2.0 * a / 3.0 * c * c * c / (ct * ct))
    }

    /// `φ'(c) = Đ (1 − 2a x_1 x_2)`.
    pub fn slope(&self, c: f64) -> f64 {
        let x = c / self.c_tot;
        self.d12 * (1.0 - 2.0 * self.interaction * x * (1.0 - x))
    }

    /// Smallest and largest slope on `[lo, hi]`.
    pub fn slope_range(&self, lo: f64, hi: f64) -> ((f64, f64), f64) {
        let mut pts = vec![lo, hi];
        let mid = 0.5 * self.c_tot;
        if lo < mid && mid < hi {
            pts.push(mid);
        }
        let min = pts.iter().map(|&c| (c, self.slope(c))).fold((lo, f64::INFINITY), |m, p| if p.1 < m.1 { p } else { m });
        let max = pts.iter().map(|&c| self.slope(c)).fold(f64::NEG_INFINITY, f64::max);
        (min, max)
    }
}

/// Solves `∂_t c = ∂_yy φ(c)` with zero-flux walls by explicit finite volumes.
///
/// `initial` holds cell averages of species 1 on `grid`. The step is
/// `cfl_safety · h² / (2 max φ')`, shortened to land on `t_end`.
pub fn filtration_oracle(
    initial: &[f64],
    model: &ThermoModel,
    d12: f64,
    c_tot: f64,
    grid: Grid1D,
    t_end: f64,
    cfl_safety: f64,
) -> Result<Vec<f64>> {
    if initial.len() != grid.ncells() {
        return Err(Error::BadDimension(format!("{} values on {} cells", initial.len(), grid.ncells())));
    }
    if !(t_end >= 0.0) || !(cfl_safety > 0.0 && cfl_safety <= 1.0) {
        return Err(Error::InvalidInput("t_end must be non-negative and cfl_safety in (0, 1]".into()));
    }
    let phi = FluxPotential::new(model, d12, c_tot)?;
    let lo = initial.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = initial.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ((at, slope), max_slope) = phi.slope_range(lo, hi);
    if !(slope > 0.0) {
        return Err(Error::NonMonotoneFlux { at, slope });
    }
    let h = grid.h();
    let dt_max = cfl_safety * h * h / (2.0 * max_slope);
    let mut c = initial.to_vec();
    let mut p = vec![0.0; c.len()];
    let mut flux = vec![0.0; c.len() + 1];
    let mut t = 0.0;
    while t < t_end {
        let remaining = t_end - t;
        let dt = if dt_max >= remaining || remaining - dt_max < 1e-9 * t_end { remaining } else { dt_max };
        for (pk, ck) in p.iter_mut().zip(&c) {
            *pk = phi.phi(*ck);
        }
        for f in 1..c.len() {
            flux[f] = -(p[f] - p[f - 1]) / h;
        }
        for k in 0..c.len() {
            c[k] += dt * (flux[k] - flux[k + 1]) / h;
        }
        t = if dt == remaining { t_end } else { t + dt };
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UphillKind {
    /// Flux along the species' own gradient.
    Reverse,
    /// Flux without a gradient.
    Osmotic,
}

/// One detected event at an interior face (face `f` lies between cells
/// `f − 1` and `f`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UphillEvent {
    pub face: usize,
    pub species: usize,
    pub time: f64,
    pub kind: UphillKind,
    pub flux: f64,
    pub gradient: f64,
}

/// A gradient counts as zero below this fraction of the largest one at the face.
pub const FLAT_GRADIENT_TOL: f64 = 1e-12;
/// A flux counts as nonzero above this fraction of the largest one at the face.
pub const NONZERO_FLUX_TOL: f64 = 1e-8;
/// Faces whose concentration jump is below this fraction of the cell total
/// carry only rounding noise and are skipped.
pub const FACE_NOISE_TOL: f64 = 1e-10;

/// Reverse and osmotic diffusion events in one state.
pub fn detect_uphill(field: &Field, spec: &MixtureSpec) -> Result<Vec<UphillEvent>> {
    let fluxes = face_fluxes(field, spec)?;
    let n = field.nspecies();
    let h = field.grid().h();
    let mut events = Vec::new();
    for f in 1..field.ncells() {
        let (left, right) = (field.cell(f - 1), field.cell(f));
        let grad: Vec<f64> = (0..n).map(|i| (right[i] - left[i]) / h).collect();
        let j = fluxes[f].as_vector();
        let gmax = grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
        let jmax = j.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if gmax * h <= FACE_NOISE_TOL * field.cell_total(f) || jmax == 0.0 {
            continue;
        }
        for i in 0..n {
            let kind = if grad[i].abs() <= FLAT_GRADIENT_TOL * gmax {
                (j[i].abs() > NONZERO_FLUX_TOL * jmax).then_some(UphillKind::Osmotic)
            } else {
                (j[i] * grad[i] > NONZERO_FLUX_TOL * jmax * gmax).then_some(UphillKind::Reverse)
            };
            if let Some(kind) = kind {
                events.push(UphillEvent { face: f, species: i, time: field.time(), kind, flux: j[i], gradient: grad[i] });
            }
        }
    }
    Ok(events)
}

/// [`detect_uphill`] over every checkpoint.
pub fn detect_uphill_trajectory(trajectory: &Trajectory, spec: &MixtureSpec) -> Result<Vec<UphillEvent>> {
    let mut all = Vec::new();
    for cp in &trajectory.checkpoints {
        all.extend(detect_uphill(&cp.field, spec)?);
    }
    Ok(all)
}

/// Closed-form determinant and trace of the reduced matrix for three species,
/// checked against assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TernaryForms {
    pub det_b: f64,
    pub tr_b: f64,
    pub det_assembled: f64,
    pub tr_assembled: f64,
    /// Closed forms agree with assembly to `1e-12` relative.
    pub matches: bool,
    /// `(tr B)² ≥ 3 det B` and the spectrum of `B⁻¹` lies within `π/6` of the
    /// positive real axis.
    pub sector_ok: bool,
}

pub const CLOSED_FORM_TOL: f64 = 1e-12;

pub fn ternary_closed_forms(comp: &Composition, dmat: &DMatrix<f64>) -> Result<TernaryForms> {
    if comp.n() != 3 {
        return Err(Error::BadDimension(format!("ternary closed forms need 3 species, got {}", comp.n())));
    }
    let x = comp.x();
    let (d12, d13, d23) = (dmat[(0, 1)], dmat[(0, 2)], dmat[(1, 2)]);
    let det_b = x[0] / (d12 * d13) + x[1] / (d12 * d23) + x[2] / (d13 * d23);
    let tr_b = (x[0] + x[1]) / d12 + (x[0] + x[2]) / d13 + (x[1] + x[2]) / d23;
    let b = assemble_b(comp, dmat)?;
    let (det_assembled, tr_assembled) = (b.det(), b.trace());
    let close = |a: f64, b: f64| (a - b).abs() <= CLOSED_FORM_TOL * a.abs().max(b.abs());
    let matches = close(det_b, det_assembled) && close(tr_b, tr_assembled);

    let inv = b.0.clone().try_inverse().ok_or_else(|| Error::SingularSystem("reduced matrix B".into()))?;
    let half_angle = std::f64::consts::FRAC_PI_6;
    let in_sector = general_eigenvalues(&inv)?
        .iter()
        .all(|z| z.re > 0.0 && z.im.atan2(z.re).abs() <= half_angle);
    let sector_ok = tr_assembled * tr_assembled >= 3.0 * det_assembled && in_sector;
    Ok(TernaryForms { det_b, tr_b, det_assembled, tr_assembled, matches, sector_ok })
}
