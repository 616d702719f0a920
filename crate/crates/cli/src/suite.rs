//! Property suite behind `msdiff verify`.

use std::fmt;

use msdiff_core::mskernel::diffusion_operator_spectrum;
use msdiff_core::solver::{simulate, Trajectory};
use msdiff_core::verify::{detect_uphill, detect_uphill_trajectory, entropy_ledger, ternary_closed_forms};
use msdiff_core::{solve_fluxes_invariant, solve_fluxes_reduced, spectrum, Composition, DrivingForce, Error};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::error::CliError;

/// Smallest mole fraction of sampled compositions.
pub const SAMPLE_MIN_FRACTION: f64 = 1e-3;
pub const ROUTE_TOL: f64 = 1e-10;
pub const ELLIPTICITY_MIN: f64 = 1e-12;
pub const MASS_TOL_PER_STEP: f64 = 1e-12;
pub const ISOBARIC_DRIFT_TOL: f64 = 1e-8;

/// Uniform point of the simplex pulled inwards so that every component is at
/// least `min`.
pub fn sample_composition<R: Rng>(rng: &mut R, n: usize, min: f64, c_tot: f64) -> Composition {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    let free = 1.0 - n as f64 * min;
    let x = DVector::from_iterator(n, e.iter().map(|v| min + free * v / s));
    Composition::normalized(x, c_tot).expect("sampled point lies on the simplex")
}

pub fn sample_force<R: Rng>(rng: &mut R, n: usize) -> DrivingForce {
    DrivingForce::projected(DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Failure the configuration declares in advance.
    ExpectedFailure,
    Skipped,
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::ExpectedFailure => "XFAIL",
            Status::Skipped => "SKIP",
            Status::Info => "INFO",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub check: &'static str,
    pub status: Status,
    pub detail: String,
}

impl Row {
    fn new(check: &'static str, status: Status, detail: impl Into<String>) -> Self {
        Self { check, status, detail: detail.into() }
    }

    fn verdict(check: &'static str, ok: bool, detail: impl Into<String>) -> Self {
        Self::new(check, if ok { Status::Pass } else { Status::Fail }, detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub seed: u64,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status == Status::Fail).count()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# seed = {}", self.seed)?;
        writeln!(f, "{:<22} {:<6} detail", "check", "status")?;
        for r in &self.rows {
            writeln!(f, "{:<22} {:<6} {}", r.check, r.status.to_string(), r.detail)?;
        }
        Ok(())
    }
}

fn not_convex_row(check: &'static str, expected: bool, err: &Error) -> Row {
    if expected {
        Row::new(check, Status::ExpectedFailure, err.to_string())
    } else {
        Row::new(check, Status::Fail, err.to_string())
    }
}

pub fn run(cfg: &RunConfig, seed: u64) -> Result<Report, CliError> {
    let spec = cfg.mixture_spec()?;
    let field = cfg.initial_field()?;
    let reactions = cfg.reaction_network()?;
    let sim = cfg.sim_config()?;
    let n = spec.n();
    let count = cfg.verify.instances;
    let expect_nc = cfg.verify.expect_not_convex;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();

    let comps: Vec<Composition> =
        (0..count).map(|_| sample_composition(&mut rng, n, SAMPLE_MIN_FRACTION, cfg.initial.c_tot)).collect();

    let mut bad = 0;
    for c in &comps {
        if !spectrum(c, &spec.dmat)?.gap_ok {
            bad += 1;
        }
    }
    rows.push(Row::verdict("spectral gap", bad == 0, format!("{bad}/{count} compositions without a gap")));

    let mut worst = 0.0_f64;
    for c in &comps {
        let d = sample_force(&mut rng, n);
        let a = solve_fluxes_invariant(c, &spec.dmat, &d)?.into_vector();
        let b = solve_fluxes_reduced(c, &spec.dmat, &d)?.into_vector();
        worst = worst.max((a - &b).norm() / b.norm().max(f64::MIN_POSITIVE));
    }
    rows.push(Row::verdict("flux routes", worst <= ROUTE_TOL, format!("max relative difference {worst:.3e}")));

    if n == 3 {
        let mut bad = 0;
        for c in &comps {
            let t = ternary_closed_forms(c, &spec.dmat)?;
            if !(t.matches && t.sector_ok) {
                bad += 1;
            }
        }
        rows.push(Row::verdict("ternary closed forms", bad == 0, format!("{bad}/{count} mismatches")));
    } else {
        rows.push(Row::new("ternary closed forms", Status::Skipped, format!("{n} species")));
    }

    let mut min_eig = f64::INFINITY;
    let mut refused = None;
    for c in &comps {
        match diffusion_operator_spectrum(c, &spec) {
            Ok(ev) => min_eig = ev.iter().map(|z| z.re).fold(min_eig, f64::min),
            Err(e @ Error::NotConvex { .. }) => {
                refused.get_or_insert(e);
            }
            Err(e) => return Err(e.into()),
        }
    }
    rows.push(match refused {
        Some(e) => not_convex_row("normal ellipticity", expect_nc, &e),
        None => Row::verdict(
            "normal ellipticity",
            min_eig >= ELLIPTICITY_MIN && !expect_nc,
            format!("min eigenvalue {min_eig:.6e}"),
        ),
    });

    let initial_events = detect_uphill(&field, &spec);
    match simulate(&field, &spec, &reactions, &sim) {
        Ok(traj) => {
            rows.push(Row::verdict(
                "simulation",
                !expect_nc,
                format!("{} steps to t = {}", traj.steps, traj.last().time),
            ));
            rows.extend(trajectory_rows(&traj, &spec));
            let events = detect_uphill_trajectory(&traj, &spec)?;
            let at_start = initial_events.map(|e| e.len()).unwrap_or(0);
            rows.push(Row::new(
                "uphill events",
                Status::Info,
                format!("{at_start} at t = 0, {} over all checkpoints", events.len()),
            ));
        }
        Err(e @ Error::NotConvex { .. }) => rows.push(not_convex_row("simulation", expect_nc, &e)),
        Err(e) => rows.push(Row::new("simulation", Status::Fail, e.to_string())),
    }
    Ok(Report { seed, rows })
}

fn trajectory_rows(traj: &Trajectory, spec: &msdiff_core::MixtureSpec) -> Vec<Row> {
    let mut rows = Vec::new();
    let first = traj.first();
    let c_tot0 = first.field.total_range().1;

    let mut drift = 0.0_f64;
    for cp in &traj.checkpoints {
        let budget = MASS_TOL_PER_STEP * cp.step.max(1) as f64;
        let rel = if traj.reactive {
            let (a, b): (f64, f64) = (cp.masses.iter().sum(), first.masses.iter().sum());
            (a - b).abs() / b
        } else {
            cp.masses
                .iter()
                .zip(&first.masses)
                .map(|(a, b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max)
        };
        drift = drift.max(rel / budget);
    }
    let what = if traj.reactive { "total moles" } else { "species masses" };
    rows.push(Row::verdict(
        "mass conservation",
        drift <= 1.0,
        format!("{what}: worst drift {:.3e} of the per-step budget", drift),
    ));

    let lo = traj.checkpoints.iter().map(|c| c.min_concentration).fold(f64::INFINITY, f64::min);
    let hi = traj.checkpoints.iter().map(|c| c.field.max_concentration()).fold(0.0, f64::max);
    rows.push(Row::verdict(
        "bounds",
        lo >= 0.0 && hi <= c_tot0 * (1.0 + 1e-12),
        format!("min {lo:.6e}, max {hi:.6e}, c_tot {c_tot0:.6e}"),
    ));

    let spread = traj
        .checkpoints
        .iter()
        .map(|c| {
            let (a, b) = c.field.total_range();
            ((a - c_tot0).abs().max((b - c_tot0).abs())) / c_tot0
        })
        .fold(0.0, f64::max);
    rows.push(Row::verdict("isobaric", spread <= ISOBARIC_DRIFT_TOL, format!("max relative drift {spread:.3e}")));

    rows.push(match entropy_ledger(traj, spec) {
        Ok(l) if !l.checked => Row::new("entropy ledger", Status::Skipped, "reactive run"),
        Ok(l) => match l.violation {
            None => Row::new("entropy ledger", Status::Pass, format!("max |V + ∫W - V0| = {:.3e}", l.max_slack())),
            Some(v) => Row::new(
                "entropy ledger",
                Status::Fail,
                format!("checkpoint {} at t = {}: {:?}", v.checkpoint, v.time, v.kind),
            ),
        },
        Err(Error::DegenerateComposition(msg)) => Row::new("entropy ledger", Status::Skipped, msg),
        Err(e) => Row::new("entropy ledger", Status::Fail, e.to_string()),
    });
    rows
}
