//! Chemical potentials, activity coefficients and the thermodynamic factor Γ.
//!
//! Potentials are expressed in units of RT with the reference part μ_i⁰ set
//! to zero, so `μ_i = ln(γ_i x_i)`. Non-ideality is modelled by the
//! multicomponent two-suffix Margules expansion
//!
//! ```text
//! g_ex / RT = Σ_{j<k} A_jk x_j x_k,     ln γ_i = Σ_j A_ij x_j − g_ex / RT
//! ```
//!
//! which reduces to `ln γ_1 = A x_2²` for a binary mixture.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{sym_part, symmetric_eigenvalues, zero_sum_basis};
use crate::mixture::{Composition, DrivingForce};

/// Compositions with any mole fraction below this are degenerate for Γ.
pub const GAMMA_FLOOR: f64 = 1e-12;

/// Activity model.
#[derive(Debug, Clone, PartialEq)]
pub enum ThermoModel {
    /// γ_i ≡ 1.
    Ideal,
    /// Two-suffix Margules with a symmetric, zero-diagonal interaction matrix.
    Margules { a: DMatrix<f64> },
}

impl ThermoModel {
    pub fn margules(a: DMatrix<f64>) -> Self {
        ThermoModel::Margules { a }
    }

    /// Binary Margules model with a single interaction parameter.
    pub fn binary_margules(a12: f64) -> Self {
        ThermoModel::Margules { a: DMatrix::from_row_slice(2, 2, &[0.0, a12, a12, 0.0]) }
    }

    pub(crate) fn check(&self, n: usize) -> std::result::Result<(), String> {
        match self {
            ThermoModel::Ideal => Ok(()),
            ThermoModel::Margules { a } => {
                if a.nrows() != n || a.ncols() != n {
                    return Err(format!(
                        "Margules matrix is {}x{} for {n} species",
                        a.nrows(),
                        a.ncols()
                    ));
                }
                for i in 0..n {
                    if a[(i, i)] != 0.0 {
                        return Err(format!("Margules A[{i}][{i}] = {} must be 0", a[(i, i)]));
                    }
                    for j in i + 1..n {
                        if a[(i, j)] != a[(j, i)] {
                            return Err(format!("Margules matrix not symmetric at ({i}, {j})"));
                        }
                        if !a[(i, j)].is_finite() {
                            return Err(format!("Margules A[{i}][{j}] is not finite"));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// `g_ex / RT`; zero for the ideal model.
    pub fn excess_gibbs(&self, x: &DVector<f64>) -> f64 {
        match self {
            ThermoModel::Ideal => 0.0,
            ThermoModel::Margules { a } => 0.5 * x.dot(&(a * x)),
        }
    }
}

/// `ln γ_i` for every species.
pub fn ln_activity_coeffs(model: &ThermoModel, x: &DVector<f64>) -> DVector<f64> {
    match model {
        ThermoModel::Ideal => DVector::zeros(x.len()),
        ThermoModel::Margules { a } => {
            let ax = a * x;
            let gex = 0.5 * x.dot(&ax);
            ax.map(|v| v - gex)
        }
    }
}

/// Thermodynamic factor `Γ_ij = δ_ij + x_i ∂ln γ_i/∂x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMatrix(pub DMatrix<f64>);

impl GammaMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Largest deviation of a column sum from one.
    pub fn column_sum_defect(&self) -> f64 {
        self.0.column_iter().map(|c| (c.sum() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Γ from analytic partials, with x_1..x_n treated as independent coordinates.
pub fn gamma_matrix(model: &ThermoModel, comp: &Composition) -> Result<GammaMatrix> {
    let x = comp.x();
    if let Some((i, &xi)) = x.iter().enumerate().find(|(_, v)| **v < GAMMA_FLOOR) {
        return Err(Error::DegenerateComposition(format!(
            "x_{i} = {xi:e} below floor {GAMMA_FLOOR:e}"
        )));
    }
    Ok(gamma_matrix_unchecked(model, x))
}

pub(crate) fn gamma_matrix_unchecked(model: &ThermoModel, x: &DVector<f64>) -> GammaMatrix {
    let n = x.len();
    match model {
        ThermoModel::Ideal => GammaMatrix(DMatrix::identity(n, n)),
        ThermoModel::Margules { a } => {
            // ∂ln γ_i/∂x_j = A_ij − (A x)_j
            let ax = a * x;
            GammaMatrix(DMatrix::from_fn(n, n, |i, j| {
                let delta = if i == j { 1.0 } else { 0.0 };
                delta + x[i] * (a[(i, j)] - ax[j])
            }))
        }
    }
}

/// `d = Γ · ∇x`.
pub fn driving_force(
    model: &ThermoModel,
    comp: &Composition,
    grad_x: &DVector<f64>,
) -> Result<DrivingForce> {
    if grad_x.len() != comp.n() {
        return Err(Error::BadDimension(format!(
            "gradient of length {} for {} species",
            grad_x.len(),
            comp.n()
        )));
    }
    // gradients of quantities summing to one must themselves sum to zero
    let grad = DrivingForce::new(grad_x.clone())?;
    let gamma = gamma_matrix(model, comp)?;
    if matches!(model, ThermoModel::Ideal) {
        return Ok(grad);
    }
    Ok(DrivingForce::projected(gamma.0 * grad_x))
}

/// Chemical potentials `μ_i / RT = ln(γ_i x_i)`.
pub fn chemical_potentials(model: &ThermoModel, x: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some((i, _)) = x.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::DegenerateComposition(format!("x_{i} = 0 has no finite potential")));
    }
    let lng = ln_activity_coeffs(model, x);
    Ok(DVector::from_fn(x.len(), |i, _| lng[i] + x[i].ln()))
}

/// Gibbs energy density `G/RT = Σ_i c_i ln(γ_i x_i)` for strictly positive `c`.
pub fn gibbs_density(model: &ThermoModel, c: &[f64]) -> Result<f64> {
    if let Some((i, &ci)) = c.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::DegenerateComposition(format!("c_{i} = {ci:e} is not positive")));
    }
    Ok(gibbs_density_limit(model, c))
}

/// As [`gibbs_density`] but with the `0 · ln 0 = 0` extension at the
/// simplex boundary. Negative entries are treated as zero.
pub fn gibbs_density_limit(model: &ThermoModel, c: &[f64]) -> f64 {
    let c_tot: f64 = c.iter().map(|v| v.max(0.0)).sum();
    if c_tot <= 0.0 {
        return 0.0;
    }
    let x = DVector::from_iterator(c.len(), c.iter().map(|v| v.max(0.0) / c_tot));
    // Σ c_i ln γ_i = c_tot · Σ x_i ln γ_i = c_tot · g_ex
    let mixing: f64 = x.iter().filter(|&&xi| xi > 0.0).map(|&xi| xi * xi.ln()).sum();
    c_tot * (mixing + model.excess_gibbs(&x))
}

/// Smallest eigenvalue of the symmetric part of `X⁻¹Γ` on the zero-sum
/// subspace. A positive value certifies strong convexity of the Gibbs energy
/// at `x`; a non-positive one marks the spinodal region.
pub fn convexity_check(model: &ThermoModel, comp: &Composition) -> f64 {
    let x = comp.x();
    let n = x.len();
    if x.iter().any(|&v| !(v > 0.0)) {
        return f64::NEG_INFINITY;
    }
    let gamma = gamma_matrix_unchecked(model, x);
    let xinv_gamma = DMatrix::from_fn(n, n, |i, j| gamma.0[(i, j)] / x[i]);
    let p = zero_sum_basis(n);
    let restricted = p.transpose() * sym_part(&xinv_gamma) * &p;
    match symmetric_eigenvalues(&restricted) {
        Ok(vals) => *vals.last().expect("n >= 2"),
        Err(_) => f64::NAN,
    }
}
