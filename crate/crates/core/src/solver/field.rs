use crate::error::{Error, Result};
use crate::mixture::{mole_fractions, Composition};

/// Relative tolerance on the spread of per-cell totals.
pub const ISOBARIC_TOL: f64 = 1e-8;

/// Uniform 1-D grid on `[0, length]` with `ncells` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    ncells: usize,
    length: f64,
}

impl Grid1D {
    pub fn new(ncells: usize, length: f64) -> Result<Self> {
        if ncells < 2 {
            return Err(Error::InvalidInput(format!("grid needs at least 2 cells, got {ncells}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidInput(format!("domain length {length} must be positive")));
        }
        Ok(Self { ncells, length })
    }

    pub fn ncells(&self) -> usize {
        self.ncells
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Cell width.
    pub fn h(&self) -> f64 {
        self.length / self.ncells as f64
    }

    pub fn center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.h()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.ncells).map(|k| self.center(k))
    }
}

/// Cell-averaged concentrations, stored cell-major (`c[k * n + i]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid1D,
    nspecies: usize,
    c: Vec<f64>,
    time: f64,
}

impl Field {
    /// Checked constructor: non-negative entries and a uniform per-cell total.
    pub fn new(grid: Grid1D, nspecies: usize, c: Vec<f64>, time: f64) -> Result<Self> {
        if nspecies < 2 {
            return Err(Error::BadDimension(format!("{nspecies} species")));
        }
        if c.len() != grid.ncells() * nspecies {
            return Err(Error::BadDimension(format!(
                "{} values for {} cells x {nspecies} species",
                c.len(),
                grid.ncells()
            )));
        }
        if let Some(pos) = c.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::NegativeConcentration { species: pos % nspecies, value: c[pos] });
        }
        let field = Self { grid, nspecies, c, time };
        let (lo, hi) = field.total_range();
        if !(lo > 0.0) {
            return Err(Error::NonPositiveTotal { total: lo });
        }
        if hi - lo > ISOBARIC_TOL * hi {
            return Err(Error::InvalidInput(format!(
                "per-cell totals vary between {lo} and {hi}; the isobaric model needs a constant total"
            )));
        }
        Ok(field)
    }

    /// Builds a field from per-cell mole fractions; each row is renormalized
    /// onto the simplex and scaled by `c_tot`.
    pub fn from_mole_fractions<F>(grid: Grid1D, nspecies: usize, c_tot: f64, mut x_at: F) -> Result<Self>
    where
        F: FnMut(f64) -> Vec<f64>,
    {
        if !(c_tot > 0.0) {
            return Err(Error::NonPositiveTotal { total: c_tot });
        }
        let mut c = Vec::with_capacity(grid.ncells() * nspecies);
        for center in grid.centers() {
            let x = x_at(center);
            if x.len() != nspecies {
                return Err(Error::BadDimension(format!(
                    "profile returned {} fractions for {nspecies} species",
                    x.len()
                )));
            }
            if let Some((species, &value)) = x.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
                return Err(Error::NegativeConcentration { species, value });
            }
            let s: f64 = x.iter().sum();
            if !(s > 0.0) {
                return Err(Error::NonPositiveTotal { total: s });
            }
            c.extend(x.iter().map(|v| c_tot * v / s));
        }
        Self::new(grid, nspecies, c, 0.0)
    }

    pub fn uniform(grid: Grid1D, x: &[f64], c_tot: f64) -> Result<Self> {
        Self::from_mole_fractions(grid, x.len(), c_tot, |_| x.to_vec())
    }

    pub(crate) fn from_raw(grid: Grid1D, nspecies: usize, c: Vec<f64>, time: f64) -> Self {
        Self { grid, nspecies, c, time }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn nspecies(&self) -> usize {
        self.nspecies
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn ncells(&self) -> usize {
        self.grid.ncells()
    }

    /// All concentrations, cell-major.
    pub fn data(&self) -> &[f64] {
        &self.c
    }

    pub fn cell(&self, k: usize) -> &[f64] {
        &self.c[k * self.nspecies..(k + 1) * self.nspecies]
    }

    pub fn cell_total(&self, k: usize) -> f64 {
        self.cell(k).iter().sum()
    }

    pub fn composition(&self, k: usize) -> Result<Composition> {
        mole_fractions(self.cell(k))
    }

    /// Smallest and largest per-cell total.
    pub fn total_range(&self) -> (f64, f64) {
        (0..self.ncells())
            .map(|k| self.cell_total(k))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)))
    }

    /// `∫ c_i dx` for one species.
    pub fn species_mass(&self, i: usize) -> f64 {
        let h = self.grid.h();
        (0..self.ncells()).map(|k| self.cell(k)[i]).sum::<f64>() * h
    }

    pub fn masses(&self) -> Vec<f64> {
        (0..self.nspecies).map(|i| self.species_mass(i)).collect()
    }

    pub fn min_concentration(&self) -> f64 {
        self.c.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_concentration(&self) -> f64 {
        self.c.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Profile of one species across the cells.
    pub fn species_profile(&self, i: usize) -> Vec<f64> {
        (0..self.ncells()).map(|k| self.cell(k)[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = Grid1D::new(4, 2.0).unwrap();
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.centers().collect::<Vec<_>>(), vec![0.25, 0.75, 1.25, 1.75]);
        assert!(Grid1D::new(1, 1.0).is_err());
        assert!(Grid1D::new(4, 0.0).is_err());
    }

    #[test]
    fn field_rejects_non_isobaric_data() {
        let g = Grid1D::new(2, 1.0).unwrap();
        assert!(Field::new(g, 2, vec![0.5, 0.5, 0.6, 0.5], 0.0).is_err());
        assert!(Field::new(g, 2, vec![0.5, 0.5, 0.6, 0.4], 0.0).is_ok());
        assert!(matches!(
            Field::new(g, 2, vec![1.1, -0.1, 0.6, 0.4], 0.0),
            Err(Error::NegativeConcentration { .. })
        ));
    }

    #[test]
    fn masses_integrate_over_cells() {
        let g = Grid1D::new(4, 2.0).unwrap();
        let f = Field::from_mole_fractions(g, 2, 3.0, |y| vec![y / 2.0, 1.0 - y / 2.0]).unwrap();
        let m = f.masses();
        assert!((m[0] + m[1] - 6.0).abs() < 1e-14);
        assert!((m[0] - 3.0).abs() < 1e-14);
    }
}
