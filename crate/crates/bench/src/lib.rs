//! Deterministic fixtures shared by the benchmarks.

use msdiff_core::solver::{Field, Grid1D};
use msdiff_core::{Composition, DrivingForce, MixtureSpec, ThermoModel};
use nalgebra::{DMatrix, DVector};

/// Diffusivities `Đ_ij = 1 + (i + 2j) mod 7 / 2` (symmetrized), all in `[1, 4]`.
pub fn dmat(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let (a, b) = (i.min(j), i.max(j));
            1.0 + ((a + 2 * b) % 7) as f64 / 2.0
        }
    })
}

/// Composition with `x_i ∝ i + 1`.
pub fn composition(n: usize) -> Composition {
    Composition::normalized(DVector::from_fn(n, |i, _| (i + 1) as f64), 1.0).unwrap()
}

/// Zero-sum force with alternating signs.
pub fn force(n: usize) -> DrivingForce {
    DrivingForce::projected(DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -0.5 } * (i + 1) as f64))
}

pub fn spec(n: usize, margules: bool) -> MixtureSpec {
    let thermo = if margules {
        ThermoModel::margules(DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 0.3 }))
    } else {
        ThermoModel::Ideal
    };
    MixtureSpec::unnamed(dmat(n), thermo).unwrap()
}

/// Smooth strictly positive profile with one cosine mode per species.
pub fn field(n: usize, ncells: usize) -> Field {
    let grid = Grid1D::new(ncells, 1.0).unwrap();
    Field::from_mole_fractions(grid, n, 1.0, |y| {
        (0..n).map(|i| 1.0 + 0.5 * (std::f64::consts::PI * (y + i as f64 / n as f64)).cos()).collect()
    })
    .unwrap()
}
