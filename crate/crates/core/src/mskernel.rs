//! Maxwell-Stefan matrices and the inversion of the flux-force relations.
//!
//! The MS relations `c_tot d_i = −Σ_{j≠i} (x_j J_i − x_i J_j)/Đ_ij` read
//! `A J = c_tot d` on the zero-sum subspace `E`, with
//!
//! ```text
//! A_ii = −s_i = −Σ_{k≠i} x_k/Đ_ik,      A_ij = x_i/Đ_ij   (i ≠ j).
//! ```
//!
//! `A` has null vector `x`, range `e⊥`, non-negative off-diagonals, and is
//! irreducible for `x ≫ 0`. It is similar to the symmetric matrix
//! `A_S = X^{-1/2} A X^{1/2}`, so its spectrum is real; all nonzero
//! eigenvalues lie at or below `−δ`, `δ = min 1/Đ_ij`.
//!
//! Three independent solution routes are provided:
//! * [`solve_fluxes_invariant`]: orthonormal projection onto `E` (primary),
//! * [`solve_fluxes_bordered`]: the rank-one shifted matrix `A − μ x⊗e`,
//! * [`solve_fluxes_reduced`]: elimination of `J_n` and LU on the
//!   `(n−1)×(n−1)` matrix `B`.

use nalgebra::{Complex, DMatrix, DVector, Schur};

use crate::error::{Error, Result};
use crate::linalg::{lu_solve, symmetric_eigenvalues, zero_sum_basis};
use crate::mixture::{min_inverse_diffusivity, Composition, DrivingForce, FluxSet, MixtureSpec};
use crate::thermo::{convexity_check, gamma_matrix_unchecked};

/// Mole fractions are raised to this value before assembling `A`.
pub const COMPOSITION_FLOOR: f64 = 1e-12;
/// Relative pivot threshold for the reduced LU route.
pub const PIVOT_TOL: f64 = 1e-14;
/// Relative tolerance used for the spectral-gap verdict.
pub const GAP_TOL: f64 = 1e-10;

fn check_dims(comp: &Composition, dmat: &DMatrix<f64>) -> Result<usize> {
    let n = comp.n();
    if dmat.nrows() != n || dmat.ncols() != n {
        return Err(Error::BadDimension(format!(
            "{n} mole fractions but a {}x{} diffusivity matrix",
            dmat.nrows(),
            dmat.ncols()
        )));
    }
    if n < 2 {
        return Err(Error::BadDimension("need at least two species".into()));
    }
    Ok(n)
}

/// The MS matrix `A(x)` together with the (floored) composition it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct MsMatrixA {
    pub a: DMatrix<f64>,
    pub x: DVector<f64>,
}

impl MsMatrixA {
    pub fn is_quasi_positive(&self) -> bool {
        let n = self.a.nrows();
        (0..n).all(|i| (0..n).all(|j| i == j || self.a[(i, j)] >= 0.0))
    }

    /// `‖A x‖∞ / ‖A‖_F`.
    pub fn null_residual(&self) -> f64 {
        (&self.a * &self.x).amax() / self.a.norm()
    }

    /// `‖eᵀA‖∞ / ‖A‖_F`.
    pub fn left_null_residual(&self) -> f64 {
        self.a.row_sum().amax() / self.a.norm()
    }

    /// Strong connectivity of the off-diagonal sparsity pattern.
    pub fn is_irreducible(&self) -> bool {
        let n = self.a.nrows();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    let entry = if forward { self.a[(i, j)] } else { self.a[(j, i)] };
                    if j != i && entry != 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }
}

/// Assembles `A(x)` after flooring `x` at [`COMPOSITION_FLOOR`].
pub fn assemble_a(comp: &Composition, dmat: &DMatrix<f64>) -> Result<MsMatrixA> {
    let n = check_dims(comp, dmat)?;
    let x = comp.floored(COMPOSITION_FLOOR).x().clone();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut s = 0.0;
        for k in 0..n {
            if k != i {
                a[(i, k)] = x[i] / dmat[(i, k)];
                s += x[k] / dmat[(i, k)];
            }
        }
        a[(i, i)] = -s;
    }
    Ok(MsMatrixA { a, x })
}

/// Symmetrized matrix `A_S = X^{-1/2} A X^{1/2}` with entries
/// `√(x_i x_j)/Đ_ij` off the diagonal and `−s_i` on it.
pub fn assemble_a_sym(comp: &Composition, dmat: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = check_dims(comp, dmat)?;
    let x = comp.floored(COMPOSITION_FLOOR).x().clone();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut s = 0.0;
        for k in 0..n {
            if k != i {
                a[(i, k)] = (x[i] * x[k]).sqrt() / dmat[(i, k)];
                s += x[k] / dmat[(i, k)];
            }
        }
        a[(i, i)] = -s;
    }
    Ok(a)
}

/// Reduced `(n−1)×(n−1)` matrix obtained by eliminating `J_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMatrixB(pub DMatrix<f64>);

impl ReducedMatrixB {
    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

/// `B_ij = x_i (1/Đ_in − 1/Đ_ij)` for `i ≠ j`,
/// `B_ii = x_i/Đ_in + Σ_{k≠i} x_k/Đ_ik`; no flooring.
pub fn assemble_b(comp: &Composition, dmat: &DMatrix<f64>) -> Result<ReducedMatrixB> {
    let n = check_dims(comp, dmat)?;
    let x = comp.x();
    let last = n - 1;
    let mut b = DMatrix::zeros(n - 1, n - 1);
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            b[(i, j)] = if i == j {
                let s: f64 = (0..n).filter(|&k| k != i).map(|k| x[k] / dmat[(i, k)]).sum();
                x[i] / dmat[(i, last)] + s
            } else {
                x[i] * (1.0 / dmat[(i, last)] - 1.0 / dmat[(i, j)])
            };
        }
    }
    Ok(ReducedMatrixB(b))
}

/// Spectrum of `A`, computed on the symmetric form `A_S`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Eigenvalues sorted in descending order.
    pub eigenvalues: Vec<f64>,
    /// `min_{i≠j} 1/Đ_ij`.
    pub delta: f64,
    /// Largest eigenvalue is a simple zero and every other one is `≤ −δ`.
    pub gap_ok: bool,
}

pub fn spectrum(comp: &Composition, dmat: &DMatrix<f64>) -> Result<SpectrumReport> {
    let a_s = assemble_a_sym(comp, dmat)?;
    let eigenvalues = symmetric_eigenvalues(&a_s)?;
    let delta = min_inverse_diffusivity(dmat);
    let norm = a_s.norm();
    let top_is_zero = eigenvalues[0].abs() <= GAP_TOL * norm;
    let rest_below = eigenvalues[1..].iter().all(|&l| l <= -delta + GAP_TOL * delta);
    Ok(SpectrumReport { eigenvalues, delta, gap_ok: top_is_zero && rest_below })
}

/// `A` restricted to `E` in the Helmert basis, factorized once and reused.
///
/// Building one of these per grid face lets the solver evaluate fluxes and the
/// diffusion operator without refactorizing.
#[derive(Debug, Clone)]
pub struct FluxOperator {
    basis: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    x: DVector<f64>,
    c_tot: f64,
}

impl FluxOperator {
    pub fn new(comp: &Composition, dmat: &DMatrix<f64>) -> Result<Self> {
        let a = assemble_a(comp, dmat)?;
        let basis = zero_sum_basis(comp.n());
        let restricted = basis.transpose() * &a.a * &basis;
        let lu = restricted.lu();
        if !lu.is_invertible() {
            return Err(Error::SingularSystem("A restricted to the zero-sum subspace".into()));
        }
        Ok(Self { basis, lu, x: a.x, c_tot: comp.c_tot() })
    }

    /// The floored mole fractions used in assembly.
    pub fn x(&self) -> &DVector<f64> {
        &self.x
    }

    /// Solves `A J = c_tot d` with `J ∈ E`.
    pub fn fluxes(&self, d: &DrivingForce) -> Result<FluxSet> {
        let d = d.as_vector();
        if d.len() != self.x.len() {
            return Err(Error::BadDimension(format!(
                "driving force of length {} for {} species",
                d.len(),
                self.x.len()
            )));
        }
        let rhs = self.basis.tr_mul(d) * self.c_tot;
        let y = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::SingularSystem("projected solve".into()))?;
        FluxSet::new(&self.basis * y)
    }

    /// Matrix of the diffusion operator `v ↦ −J(v)` on `E` in the Helmert
    /// basis, where `v` is a concentration gradient, `∇x = v/c_tot` and
    /// `d = Γ ∇x`. Its eigenvalues are those of `D(u)` restricted to `E`.
    pub fn diffusion_matrix(&self, gamma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let rhs = self.basis.tr_mul(&(gamma * &self.basis));
        let k = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::SingularSystem("projected solve".into()))?;
        Ok(-k)
    }
}

/// Primary route: projection of `A J = c_tot d` onto an orthonormal basis of `E`.
pub fn solve_fluxes_invariant(
    comp: &Composition,
    dmat: &DMatrix<f64>,
    d: &DrivingForce,
) -> Result<FluxSet> {
    FluxOperator::new(comp, dmat)?.fluxes(d)
}

/// Secondary route through the invertible matrix `A_μ = A − μ (x ⊗ e)`.
///
/// For `d ⊥ e`, `A_μ y = c_tot d` forces `y ⊥ e` and hence `A y = c_tot d`.
/// `mu` defaults to `δ/2`.
pub fn solve_fluxes_bordered(
    comp: &Composition,
    dmat: &DMatrix<f64>,
    d: &DrivingForce,
    mu: Option<f64>,
) -> Result<FluxSet> {
    let n = check_dims(comp, dmat)?;
    let a = assemble_a(comp, dmat)?;
    let mu = mu.unwrap_or_else(|| 0.5 * min_inverse_diffusivity(dmat));
    let mut a_mu = a.a;
    for i in 0..n {
        for j in 0..n {
            a_mu[(i, j)] -= mu * a.x[i];
        }
    }
    let rhs = d.as_vector() * comp.c_tot();
    let j = a_mu
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("bordered matrix".into()))?;
    FluxSet::new(j)
}

/// Reduced route: `B (J_1..J_{n−1}) = −c_tot (d_1..d_{n−1})`, `J_n = −Σ J_i`.
pub fn solve_fluxes_reduced(
    comp: &Composition,
    dmat: &DMatrix<f64>,
    d: &DrivingForce,
) -> Result<FluxSet> {
    let n = check_dims(comp, dmat)?;
    if d.len() != n {
        return Err(Error::BadDimension(format!("driving force of length {}", d.len())));
    }
    let b = assemble_b(comp, dmat)?;
    let rhs = DVector::from_fn(n - 1, |i, _| -comp.c_tot() * d[i]);
    let head = lu_solve(&b.0, &rhs, PIVOT_TOL)?;
    let tail = -head.sum();
    let j = DVector::from_fn(n, |i, _| if i < n - 1 { head[i] } else { tail });
    FluxSet::new(j)
}

/// Fick-limit diffusivity `D_i = 1 / Σ_{j≠i} x_j/Đ_ij`, the coefficient that
/// survives where species `i` vanishes.
pub fn fick_limit_d(comp: &Composition, dmat: &DMatrix<f64>, i: usize) -> Result<f64> {
    let n = check_dims(comp, dmat)?;
    if i >= n {
        return Err(Error::BadDimension(format!("species index {i} out of range")));
    }
    let x = comp.x();
    let denom: f64 = (0..n).filter(|&j| j != i).map(|j| x[j] / dmat[(i, j)]).sum();
    if !(denom > 0.0) {
        return Err(Error::DegenerateComposition(format!(
            "species {i} is pure; no other species to diffuse through"
        )));
    }
    Ok(1.0 / denom)
}

/// Matrix of `D(u)` on `E` (Helmert basis) without the convexity gate.
pub fn diffusion_matrix(comp: &Composition, spec: &MixtureSpec) -> Result<DMatrix<f64>> {
    let op = FluxOperator::new(comp, &spec.dmat)?;
    let gamma = gamma_matrix_unchecked(&spec.thermo, op.x());
    op.diffusion_matrix(&gamma.0)
}

/// Eigenvalues of a small real matrix, sorted by descending real part.
pub fn general_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let mut vals: Vec<Complex<f64>> = if m.nrows() == 1 {
        vec![Complex::new(m[(0, 0)], 0.0)]
    } else {
        Schur::try_new(m.clone(), f64::EPSILON, 10_000)
            .ok_or(Error::EigSolverFailure)?
            .complex_eigenvalues()
            .iter()
            .copied()
            .collect()
    };
    vals.sort_by(|a, b| b.re.total_cmp(&a.re));
    Ok(vals)
}

/// Eigenvalues of the multicomponent diffusion operator `D(u)` on `E`.
///
/// Fails with [`Error::NotConvex`] where the Gibbs energy loses strong
/// convexity, i.e. where the system stops being parabolic.
pub fn diffusion_operator_spectrum(comp: &Composition, spec: &MixtureSpec) -> Result<Vec<Complex<f64>>> {
    let lam = convexity_check(&spec.thermo, &comp.floored(COMPOSITION_FLOOR));
    if !(lam > 0.0) {
        return Err(Error::NotConvex { min_eigenvalue: lam });
    }
    general_eigenvalues(&diffusion_matrix(comp, spec)?)
}
