//! Small dense kernels shared by the Maxwell-Stefan routines.
//!
//! Everything here works on `nalgebra` dynamic matrices; the systems are
//! tiny (n ≤ ~10) so there is nothing to gain from blocking or sparsity.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Orthonormal basis of `E = { v : Σ v_i = 0 }` as the columns of an
/// `n × (n-1)` matrix (Helmert contrasts).
///
/// Column `k` is `(1, …, 1, -(k+1), 0, …) / sqrt((k+1)(k+2))` with `k+1` ones.
pub fn zero_sum_basis(n: usize) -> DMatrix<f64> {
    assert!(n >= 2, "zero-sum subspace needs n >= 2");
    let mut p = DMatrix::zeros(n, n - 1);
    for k in 0..n - 1 {
        let m = (k + 1) as f64;
        let scale = 1.0 / (m * (m + 1.0)).sqrt();
        for i in 0..=k {
            p[(i, k)] = scale;
        }
        p[(k + 1, k)] = -m * scale;
    }
    p
}

/// Removes the mean so that the entries sum to zero.
pub fn project_zero_sum(v: &DVector<f64>) -> DVector<f64> {
    let mean = v.sum() / v.len() as f64;
    v.map(|vi| vi - mean)
}

/// Largest absolute entry.
pub fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Solves `a · y = b` by Doolittle LU with partial pivoting.
///
/// A pivot smaller than `pivot_tol · max|a_ij|` is treated as breakdown.
pub fn lu_solve(a: &DMatrix<f64>, b: &DVector<f64>, pivot_tol: f64) -> Result<DVector<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::BadDimension(format!(
            "lu_solve: {}x{} matrix with rhs of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let scale = a.amax();
    if scale == 0.0 {
        return Err(Error::SingularSystem("zero matrix".into()));
    }
    let mut lu = a.clone();
    let mut rhs = b.clone();
    for k in 0..n {
        let (piv, piv_val) = (k..n)
            .map(|r| (r, lu[(r, k)].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_val < pivot_tol * scale {
            return Err(Error::SingularSystem(format!(
                "pivot {piv_val:e} below {:e} at column {k}",
                pivot_tol * scale
            )));
        }
        if piv != k {
            lu.swap_rows(piv, k);
            rhs.swap_rows(piv, k);
        }
        let pivot = lu[(k, k)];
        for r in k + 1..n {
            let factor = lu[(r, k)] / pivot;
            lu[(r, k)] = factor;
            for c in k + 1..n {
                lu[(r, c)] -= factor * lu[(k, c)];
            }
            rhs[r] -= factor * rhs[k];
        }
    }
    let mut y = DVector::zeros(n);
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for c in r + 1..n {
            acc -= lu[(r, c)] * y[c];
        }
        y[r] = acc / lu[(r, r)];
    }
    Ok(y)
}

/// Eigenvalues of a symmetric matrix, sorted in descending order.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::EigSolverFailure)?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

/// Symmetric part `(m + mᵀ) / 2`.
pub fn sym_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}
