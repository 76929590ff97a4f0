//! Thin helpers over nalgebra for the Hermitian and rank computations used
//! throughout the crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Eigenvalues in ascending order with matching eigenvector columns.
/// The input is symmetrized first, so only its Hermitian part matters.
pub fn hermitian_eigen(matrix: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = matrix.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let sym = (matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(matrix: &CMatrix) -> Vec<f64> {
    if matrix.nrows() == 0 {
        return Vec::new();
    }
    let sym = (matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
    let mut values: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn min_eigenvalue(matrix: &CMatrix) -> f64 {
    hermitian_eigenvalues(matrix).first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(matrix: &CMatrix) -> f64 {
    hermitian_eigenvalues(matrix).last().copied().unwrap_or(0.0)
}

pub fn singular_values(matrix: &CMatrix) -> Vec<f64> {
    if matrix.is_empty() {
        return Vec::new();
    }
    let mut values: Vec<f64> = SVD::new(matrix.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn numerical_rank(matrix: &CMatrix, rel_tol: f64) -> usize {
    let values = singular_values(matrix);
    let Some(&largest) = values.first() else {
        return 0;
    };
    if largest == 0.0 {
        return 0;
    }
    values.iter().filter(|&&s| s > rel_tol * largest).count()
}

/// Orthonormal basis (as columns) of the orthogonal complement of the row
/// space, using the right singular vectors beyond the numerical rank.
pub fn row_space_complement(matrix: &CMatrix, rel_tol: f64) -> CMatrix {
    let cols = matrix.ncols();
    // pad to at least as many rows as columns so SVD returns the full V
    let padded = if matrix.nrows() < cols {
        let mut m = CMatrix::zeros(cols, cols);
        m.view_mut((0, 0), (matrix.nrows(), cols)).copy_from(matrix);
        m
    } else {
        matrix.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let largest = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= rel_tol * largest || largest == 0.0)
        .collect();
    CMatrix::from_fn(cols, kept.len(), |r, c| v_t[(kept[c], r)].conj())
}

/// Hermitian square root of the inverse of a positive definite matrix.
pub fn inverse_sqrt(matrix: &CMatrix) -> Option<CMatrix> {
    let (values, vectors) = hermitian_eigen(matrix);
    if values.first().is_none_or(|&v| v <= 0.0) {
        return None;
    }
    let scale = CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|v| Complex64::new(v.sqrt().recip(), 0.0)),
    ));
    Some(&vectors * scale * vectors.adjoint())
}

/// Largest absolute entrywise difference.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
