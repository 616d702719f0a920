//! Subcommand implementations. Each writes its report to `out`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use msdiff_core::solver::simulate;
use msdiff_core::thermo::driving_force;
use msdiff_core::{solve_fluxes_bordered, solve_fluxes_invariant, solve_fluxes_reduced, spectrum, Composition};
use nalgebra::DVector;
use serde_json::json;

use crate::config::{parse_composition, RunConfig};
use crate::error::CliError;
use crate::output::{write_ledger, write_trajectory};
use crate::suite;

/// Command-line overrides shared by all subcommands.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub composition: Option<Vec<f64>>,
    pub gradient: Option<Vec<f64>>,
}

fn probe(cfg: &RunConfig, ov: &Overrides) -> Result<(Composition, DVector<f64>), CliError> {
    let (mut comp, mut grad) = cfg.probe()?;
    if let Some(x) = &ov.composition {
        comp = parse_composition(x, cfg.n(), cfg.initial.c_tot)?;
    }
    if let Some(g) = &ov.gradient {
        if g.len() != cfg.n() {
            return Err(CliError::Config(format!("gradient needs {} entries, got {}", cfg.n(), g.len())));
        }
        grad = DVector::from_column_slice(g);
    }
    Ok((comp, grad))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn spectrum_cmd<W: Write>(cfg: &RunConfig, ov: &Overrides, out: &mut W) -> Result<(), CliError> {
    let spec = cfg.mixture_spec()?;
    let (comp, _) = probe(cfg, ov)?;
    let report = spectrum(&comp, &spec.dmat)?;
    let record = json!({
        "composition": comp.x().as_slice(),
        "eigenvalues": report.eigenvalues,
        "delta": report.delta,
        "gap_ok": report.gap_ok,
    });
    writeln!(out, "{record}").map_err(io_err(Path::new("<stdout>")))
}

pub fn fluxes_cmd<W: Write>(cfg: &RunConfig, ov: &Overrides, out: &mut W) -> Result<(), CliError> {
    let spec = cfg.mixture_spec()?;
    let (comp, grad) = probe(cfg, ov)?;
    let d = driving_force(&spec.thermo, &comp, &grad).map_err(|e| match e {
        msdiff_core::Error::GibbsDuhem { .. } => CliError::Config(format!("gradient: {e}")),
        other => other.into(),
    })?;
    let inv = solve_fluxes_invariant(&comp, &spec.dmat, &d)?.into_vector();
    let red = solve_fluxes_reduced(&comp, &spec.dmat, &d)?.into_vector();
    let bord = solve_fluxes_bordered(&comp, &spec.dmat, &d, None)?.into_vector();
    let scale = inv.norm().max(f64::MIN_POSITIVE);
    let diff = (&inv - &red).norm().max((&inv - &bord).norm()) / scale;
    let record = json!({
        "composition": comp.x().as_slice(),
        "gradient": grad.as_slice(),
        "driving_force": d.as_vector().as_slice(),
        "invariant": inv.as_slice(),
        "reduced": red.as_slice(),
        "bordered": bord.as_slice(),
        "max_relative_difference": if inv.norm() == 0.0 { 0.0 } else { diff },
    });
    writeln!(out, "{record}").map_err(io_err(Path::new("<stdout>")))
}

/// Paths of the files written by [`simulate_cmd`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutputs {
    pub trajectory: PathBuf,
    pub ledger: PathBuf,
}

pub fn simulate_cmd<W: Write>(
    cfg: &RunConfig,
    ov: &Overrides,
    out_dir: &Path,
    out: &mut W,
) -> Result<SimOutputs, CliError> {
    let seed = ov.seed.unwrap_or(cfg.seed);
    let spec = cfg.mixture_spec()?;
    let field = cfg.initial_field()?;
    let reactions = cfg.reaction_network()?;
    let sim = cfg.sim_config()?;
    let traj = simulate(&field, &spec, &reactions, &sim)?;

    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let paths = SimOutputs { trajectory: out_dir.join(&cfg.output.trajectory), ledger: out_dir.join(&cfg.output.ledger) };
    let mut w = BufWriter::new(File::create(&paths.trajectory).map_err(io_err(&paths.trajectory))?);
    write_trajectory(&mut w, &traj, seed).and_then(|_| w.flush()).map_err(io_err(&paths.trajectory))?;
    let mut w = BufWriter::new(File::create(&paths.ledger).map_err(io_err(&paths.ledger))?);
    write_ledger(&mut w, &traj, seed).and_then(|_| w.flush()).map_err(io_err(&paths.ledger))?;

    writeln!(
        out,
        "{} steps, t = {}, {} checkpoints, min concentration {:e}\ntrajectory: {}\nledger: {}",
        traj.steps,
        traj.last().time,
        traj.checkpoints.len(),
        traj.checkpoints.iter().map(|c| c.min_concentration).fold(f64::INFINITY, f64::min),
        paths.trajectory.display(),
        paths.ledger.display()
    )
    .map_err(io_err(Path::new("<stdout>")))?;
    Ok(paths)
}

pub fn verify_cmd<W: Write>(cfg: &RunConfig, ov: &Overrides, out: &mut W) -> Result<suite::Report, CliError> {
    let seed = ov.seed.unwrap_or(cfg.seed);
    let report = suite::run(cfg, seed)?;
    write!(out, "{report}").map_err(io_err(Path::new("<stdout>")))?;
    match report.failures() {
        0 => Ok(report),
        k => Err(CliError::VerifyFailed(k)),
    }
}
