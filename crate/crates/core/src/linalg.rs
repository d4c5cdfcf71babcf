//! Dense helpers shared by the estimators: column-stacking `vec`, Kronecker
//! products, guarded SPD solves and spectral radius.

use nalgebra::{DMatrix, DVector};

/// Column-stacking vectorisation: `result[i + m*j] = a[(i, j)]`.
pub fn vec_col(a: &DMatrix<f64>) -> DVector<f64> {
    // nalgebra storage is column-major, so the raw slice is already vec(A)
    DVector::from_column_slice(a.as_slice())
}

/// Inverse of [`vec_col`] for an `m x n` target shape.
pub fn unvec(v: &DVector<f64>, m: usize, n: usize) -> DMatrix<f64> {
    assert_eq!(v.len(), m * n, "unvec: length {} != {m}x{n}", v.len());
    DMatrix::from_column_slice(m, n, v.as_slice())
}

/// Kronecker product `A ⊗ B`; block `(i, j)` equals `A[i,j] * B`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let (p, q) = b.shape();
    let mut out = DMatrix::zeros(m * p, n * q);
    for j in 0..n {
        for i in 0..m {
            let aij = a[(i, j)];
            if aij == 0.0 {
                continue;
            }
            for l in 0..q {
                for k in 0..p {
                    out[(i * p + k, j * q + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two column vectors.
pub fn kron_vec(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(a.len() * b.len());
    for (i, &ai) in a.iter().enumerate() {
        for (k, &bk) in b.iter().enumerate() {
            out[i * b.len() + k] = ai * bk;
        }
    }
    out
}

/// `0.5 (A + Aᵀ)`.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Condition number of a symmetric matrix from its eigenvalues.
///
/// Returns `inf` when the smallest eigenvalue is not positive.
pub fn spd_condition(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 1.0;
    }
    let eig = symmetrize(a).symmetric_eigenvalues();
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Condition number of a general square matrix from its singular values.
pub fn condition(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 1.0;
    }
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse of a symmetric positive-definite matrix, or `None` when the
/// condition number exceeds `max_condition`.
pub fn spd_inverse(a: &DMatrix<f64>, max_condition: f64) -> Option<DMatrix<f64>> {
    if a.nrows() == 0 {
        return Some(DMatrix::zeros(0, 0));
    }
    let sym = symmetrize(a);
    if spd_condition(&sym) > max_condition {
        return None;
    }
    let chol = sym.cholesky()?;
    Some(symmetrize(&chol.inverse()))
}

/// Numerical rank from singular values with an absolute-relative tolerance.
pub fn rank(a: &DMatrix<f64>, tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&x| x > tol * max.max(1.0)).count()
}

/// Largest eigenvalue modulus of a general square matrix.
pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn frobenius(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
