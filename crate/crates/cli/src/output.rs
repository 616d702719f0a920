//! CSV writers. Numbers carry 17 significant digits so reruns can be
//! compared byte for byte.

use std::io::{self, Write};

use msdiff_core::solver::Trajectory;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), num)
}

/// `time, cell_index, cell_center, species_name, concentration`, one row per
/// checkpoint, cell and species.
pub fn write_trajectory<W: Write>(out: &mut W, traj: &Trajectory, seed: u64) -> io::Result<()> {
    writeln!(out, "# seed = {seed}")?;
    writeln!(out, "time,cell_index,cell_center,species_name,concentration")?;
    for cp in &traj.checkpoints {
        let t = num(cp.time);
        let grid = cp.field.grid();
        for k in 0..cp.field.ncells() {
            let center = num(grid.center(k));
            for (name, c) in traj.names.iter().zip(cp.field.cell(k)) {
                writeln!(out, "{t},{k},{center},{name},{}", num(*c))?;
            }
        }
    }
    Ok(())
}

/// `time, V, W, cumulative_W, min_concentration, mass_<species>`; undefined
/// dissipation values are written as `nan`.
pub fn write_ledger<W: Write>(out: &mut W, traj: &Trajectory, seed: u64) -> io::Result<()> {
    writeln!(out, "# seed = {seed}")?;
    write!(out, "time,V,W,cumulative_W,min_concentration")?;
    for name in &traj.names {
        write!(out, ",mass_{name}")?;
    }
    writeln!(out)?;
    for cp in &traj.checkpoints {
        write!(
            out,
            "{},{},{},{},{}",
            num(cp.time),
            num(cp.entropy),
            opt(cp.dissipation),
            opt(cp.dissipated),
            num(cp.min_concentration)
        )?;
        for m in &cp.masses {
            write!(out, ",{}", num(*m))?;
        }
        writeln!(out)?;
    }
    Ok(())
}
