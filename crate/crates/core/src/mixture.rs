//! Mixture description and composition arithmetic.
//!
//! Units follow SI conventions in documentation only: diffusivities in m²/s,
//! concentrations in mol/m³, fluxes in mol/(m²·s). The code stores plain
//! `f64` values.

use nalgebra::DVector;
use thiserror::Error;

use crate::error::{Error, Result};
use crate::linalg::max_abs;
use crate::thermo::ThermoModel;

/// Tolerance on `|Σ x_i - 1|` for a composition.
pub const SIMPLEX_TOL: f64 = 1e-12;
/// Relative tolerance on zero-sum vectors (driving forces and fluxes).
pub const ZERO_SUM_TOL: f64 = 1e-12;
/// Negative concentrations above `-NEGATIVE_CLAMP · Σc` are rounding noise.
pub const NEGATIVE_CLAMP: f64 = 1e-10;

/// Species count, Maxwell-Stefan diffusivities Đ and the thermodynamic model.
///
/// Đ is stored as a full symmetric `n × n` matrix with a zero diagonal. The
/// drag coefficients are `f_ij = 1 / Đ_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub names: Vec<String>,
    pub dmat: nalgebra::DMatrix<f64>,
    pub thermo: ThermoModel,
}

/// One violated [`MixtureSpec`] invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecViolation {
    #[error("bad dimension: {0}")]
    BadDimension(String),
    #[error("diffusivity matrix not symmetric at ({i}, {j}): {a} vs {b}")]
    AsymmetricD { i: usize, j: usize, a: f64, b: f64 },
    #[error("diffusivity D[{i}][{j}] = {value} is not positive")]
    NonPositiveD { i: usize, j: usize, value: f64 },
    #[error("diagonal entry D[{i}][{i}] = {value} must be stored as 0")]
    NonZeroDiagonal { i: usize, value: f64 },
    #[error("thermodynamic model: {0}")]
    InvalidThermo(String),
}

impl MixtureSpec {
    /// Builds a spec and runs [`validate_spec`] on it.
    pub fn new(
        names: Vec<String>,
        dmat: nalgebra::DMatrix<f64>,
        thermo: ThermoModel,
    ) -> std::result::Result<Self, Vec<SpecViolation>> {
        let spec = Self { names, dmat, thermo };
        validate_spec(&spec)?;
        Ok(spec)
    }

    /// Spec with unnamed species `S1..Sn`.
    pub fn unnamed(
        dmat: nalgebra::DMatrix<f64>,
        thermo: ThermoModel,
    ) -> std::result::Result<Self, Vec<SpecViolation>> {
        let names = (1..=dmat.nrows()).map(|i| format!("S{i}")).collect();
        Self::new(names, dmat, thermo)
    }

    pub fn n(&self) -> usize {
        self.dmat.nrows()
    }

    /// `δ = min_{i≠j} 1/Đ_ij`.
    pub fn delta(&self) -> f64 {
        min_inverse_diffusivity(&self.dmat)
    }
}

pub(crate) fn min_inverse_diffusivity(dmat: &nalgebra::DMatrix<f64>) -> f64 {
    let n = dmat.nrows();
    let mut delta = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                delta = delta.min(1.0 / dmat[(i, j)]);
            }
        }
    }
    delta
}

/// Checks every [`MixtureSpec`] invariant and returns all violations.
pub fn validate_spec(spec: &MixtureSpec) -> std::result::Result<(), Vec<SpecViolation>> {
    let mut errs = Vec::new();
    let n = spec.dmat.nrows();
    if spec.dmat.ncols() != n {
        errs.push(SpecViolation::BadDimension(format!(
            "diffusivity matrix is {}x{}",
            n,
            spec.dmat.ncols()
        )));
        return Err(errs);
    }
    if n < 2 {
        errs.push(SpecViolation::BadDimension(format!("need at least 2 species, got {n}")));
    }
    if spec.names.len() != n {
        errs.push(SpecViolation::BadDimension(format!(
            "{} names for {n} species",
            spec.names.len()
        )));
    }
    for i in 0..n {
        let dii = spec.dmat[(i, i)];
        if dii != 0.0 {
            errs.push(SpecViolation::NonZeroDiagonal { i, value: dii });
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            let a = spec.dmat[(i, j)];
            if j > i {
                let b = spec.dmat[(j, i)];
                if a != b {
                    errs.push(SpecViolation::AsymmetricD { i, j, a, b });
                }
            }
            // NaN fails this test too
            if !(a > 0.0 && a.is_finite()) {
                errs.push(SpecViolation::NonPositiveD { i, j, value: a });
            }
        }
    }
    if let Err(msg) = spec.thermo.check(n) {
        errs.push(SpecViolation::InvalidThermo(msg));
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

/// Mole fractions on the simplex together with the total concentration.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    x: DVector<f64>,
    c_tot: f64,
}

impl Composition {
    /// Checked constructor: `x_i ≥ 0`, `|Σx - 1| ≤ 1e-12`, `c_tot > 0`.
    pub fn new(x: DVector<f64>, c_tot: f64) -> Result<Self> {
        if !(c_tot > 0.0) {
            return Err(Error::NonPositiveTotal { total: c_tot });
        }
        if let Some((species, &value)) = x.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::NegativeConcentration { species, value });
        }
        let s = x.sum();
        if (s - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidInput(format!("mole fractions sum to {s}")));
        }
        Ok(Self { x, c_tot })
    }

    /// Composition from any positive vector, normalized onto the simplex.
    pub fn normalized(x: DVector<f64>, c_tot: f64) -> Result<Self> {
        let s = x.sum();
        if !(s > 0.0) {
            return Err(Error::NonPositiveTotal { total: s });
        }
        Self::new(x / s, c_tot)
    }

    pub fn from_slice(x: &[f64], c_tot: f64) -> Result<Self> {
        Self::new(DVector::from_column_slice(x), c_tot)
    }

    pub fn x(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn c_tot(&self) -> f64 {
        self.c_tot
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// `c_i = c_tot · x_i`.
    pub fn concentrations(&self) -> DVector<f64> {
        &self.x * self.c_tot
    }

    /// Raises entries below `floor` to exactly `floor` and rescales the
    /// remaining entries so the result stays on the simplex.
    pub fn floored(&self, floor: f64) -> Composition {
        if self.x.iter().all(|&v| v >= floor) {
            return self.clone();
        }
        let low = self.x.iter().filter(|&&v| v < floor).count() as f64;
        let rest: f64 = self.x.iter().filter(|&&v| v >= floor).sum();
        let scale = (1.0 - low * floor) / rest;
        let y = self.x.map(|v| if v < floor { floor } else { v * scale });
        Composition { x: y, c_tot: self.c_tot }
    }

    pub fn min_fraction(&self) -> f64 {
        self.x.min()
    }
}

/// Mole fractions `x_i = c_i / Σc` with `c_tot = Σc`.
///
/// Negatives down to `-1e-10 · Σc` are clamped to zero; anything larger is an
/// error.
pub fn mole_fractions(c: &[f64]) -> Result<Composition> {
    let total: f64 = c.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NonPositiveTotal { total });
    }
    let mut clamped = Vec::with_capacity(c.len());
    for (species, &ci) in c.iter().enumerate() {
        if ci < -NEGATIVE_CLAMP * total || ci.is_nan() {
            return Err(Error::NegativeConcentration { species, value: ci });
        }
        clamped.push(ci.max(0.0));
    }
    let c_tot: f64 = clamped.iter().sum();
    let x = DVector::from_iterator(c.len(), clamped.iter().map(|ci| ci / c_tot));
    Ok(Composition { x, c_tot })
}

/// Thermodynamic driving forces `d_i` (one spatial direction).
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingForce(DVector<f64>);

impl DrivingForce {
    /// Checked constructor enforcing the Gibbs-Duhem relation `Σ d_i = 0`.
    pub fn new(d: DVector<f64>) -> Result<Self> {
        let sum = d.sum();
        let max = max_abs(&d);
        if sum.abs() > ZERO_SUM_TOL * max {
            return Err(Error::GibbsDuhem { sum, max });
        }
        Ok(Self(d))
    }

    /// Projects `d` onto the zero-sum subspace first.
    pub fn projected(d: DVector<f64>) -> Self {
        Self(crate::linalg::project_zero_sum(&d))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Diffusive molar fluxes `J_i` with `Σ J_i = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxSet(DVector<f64>);

impl FluxSet {
    pub fn new(j: DVector<f64>) -> Result<Self> {
        let sum = j.sum();
        let max = max_abs(&j);
        if sum.abs() > ZERO_SUM_TOL * max {
            return Err(Error::FluxSum { sum, max });
        }
        Ok(Self(j))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for FluxSet {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::Index<usize> for DrivingForce {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn dm(rows: &[&[f64]]) -> DMatrix<f64> {
        let n = rows.len();
        DMatrix::from_fn(n, n, |i, j| rows[i][j])
    }

    #[test]
    fn mole_fraction_examples() {
        let comp = mole_fractions(&[1.0, 1.0]).unwrap();
        assert_eq!(comp.x().as_slice(), &[0.5, 0.5]);
        assert_eq!(comp.c_tot(), 2.0);

        let comp = mole_fractions(&[2.0, 0.0, 0.0]).unwrap();
        assert_eq!(comp.x().as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(comp.c_tot(), 2.0);

        let comp = mole_fractions(&[1.0, 2.0, 3.0]).unwrap();
        assert_relative_eq!(comp.x()[0], 1.0 / 6.0, epsilon = 1e-16);
        assert_relative_eq!(comp.x()[1], 1.0 / 3.0, epsilon = 1e-16);
        assert_relative_eq!(comp.x()[2], 0.5, epsilon = 1e-16);
        assert_eq!(comp.c_tot(), 6.0);
    }

    #[test]
    fn mole_fraction_errors_and_clamp() {
        assert!(matches!(mole_fractions(&[0.0, 0.0]), Err(Error::NonPositiveTotal { .. })));
        assert!(matches!(mole_fractions(&[1.0, -1.0]), Err(Error::NonPositiveTotal { .. })));
        assert!(matches!(
            mole_fractions(&[1.0, -1e-6]),
            Err(Error::NegativeConcentration { species: 1, .. })
        ));
        let comp = mole_fractions(&[1.0, -1e-12]).unwrap();
        assert_eq!(comp.x()[1], 0.0);
        assert_eq!(comp.x()[0], 1.0);
    }

    #[test]
    fn validate_spec_examples() {
        let ok = MixtureSpec {
            names: vec!["a".into(), "b".into()],
            dmat: dm(&[&[0.0, 1.0], &[1.0, 0.0]]),
            thermo: ThermoModel::Ideal,
        };
        assert!(validate_spec(&ok).is_ok());

        let asym = MixtureSpec { dmat: dm(&[&[0.0, 1.0], &[2.0, 0.0]]), ..ok.clone() };
        let errs = validate_spec(&asym).unwrap_err();
        assert!(errs.iter().any(|e| matches!(e, SpecViolation::AsymmetricD { .. })));

        let neg = MixtureSpec { dmat: dm(&[&[0.0, -1.0], &[-1.0, 0.0]]), ..ok.clone() };
        let errs = validate_spec(&neg).unwrap_err();
        assert_eq!(errs.len(), 2, "both off-diagonal entries reported: {errs:?}");
        assert!(errs.iter().all(|e| matches!(e, SpecViolation::NonPositiveD { .. })));
    }

    #[test]
    fn validate_spec_reports_every_violation() {
        let bad = MixtureSpec {
            names: vec!["a".into()],
            dmat: dm(&[&[1.0, -1.0, 1.0], &[-1.0, 0.0, 2.0], &[1.0, 3.0, 0.0]]),
            thermo: ThermoModel::margules(DMatrix::zeros(2, 2)),
        };
        let errs = validate_spec(&bad).unwrap_err();
        assert!(errs.iter().any(|e| matches!(e, SpecViolation::BadDimension(_))));
        assert!(errs.iter().any(|e| matches!(e, SpecViolation::AsymmetricD { i: 1, j: 2, .. })));
        assert!(errs.iter().any(|e| matches!(e, SpecViolation::NonPositiveD { .. })));
        assert!(errs.iter().any(|e| matches!(e, SpecViolation::NonZeroDiagonal { i: 0, .. })));
        assert!(errs.iter().any(|e| matches!(e, SpecViolation::InvalidThermo(_))));
    }

    #[test]
    fn zero_sum_wrappers() {
        assert!(DrivingForce::new(DVector::from_vec(vec![1.0, -1.0])).is_ok());
        assert!(matches!(
            DrivingForce::new(DVector::from_vec(vec![1.0, -0.5])),
            Err(Error::GibbsDuhem { .. })
        ));
        assert!(FluxSet::new(DVector::from_vec(vec![0.0, 0.0])).is_ok());
        assert!(matches!(
            FluxSet::new(DVector::from_vec(vec![1.0, 1.0])),
            Err(Error::FluxSum { .. })
        ));
        let p = DrivingForce::projected(DVector::from_vec(vec![1.0, 2.0, 3.0]));
        assert!(p.as_vector().sum().abs() < 1e-15);
    }

    #[test]
    fn floor_renormalizes() {
        let comp = Composition::from_slice(&[1.0, 0.0, 0.0], 3.0).unwrap();
        let f = comp.floored(1e-12);
        assert!(f.x().iter().all(|&v| v >= 1e-12));
        assert_relative_eq!(f.x().sum(), 1.0, epsilon = 1e-15);
        assert_eq!(f.c_tot(), 3.0);
    }

    proptest! {
        #[test]
        fn mole_fractions_scale_invariant(
            c in prop::collection::vec(0.0f64..10.0, 2..7),
            alpha in 1e-3f64..1e3,
        ) {
            prop_assume!(c.iter().sum::<f64>() > 1e-6);
            let a = mole_fractions(&c).unwrap();
            let scaled: Vec<f64> = c.iter().map(|v| v * alpha).collect();
            let b = mole_fractions(&scaled).unwrap();
            for i in 0..c.len() {
                prop_assert!((a.x()[i] - b.x()[i]).abs() <= 1e-14);
            }
        }

        #[test]
        fn mole_fractions_round_trip(c in prop::collection::vec(0.0f64..10.0, 2..7)) {
            prop_assume!(c.iter().sum::<f64>() > 1e-6);
            let comp = mole_fractions(&c).unwrap();
            let back = comp.concentrations();
            let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..c.len() {
                prop_assert!((back[i] - c[i]).abs() <= 1e-14 * scale);
            }
        }
    }
}
