//! Small dense linear-algebra helpers shared by the numeric modules.

use nalgebra::{Cholesky, Dyn, SymmetricEigen};

use crate::{Matrix, Vector};

/// Eigen-decomposition of a symmetric matrix with eigenvalues ascending and
/// eigenvector columns permuted to match.
pub(crate) fn sorted_symmetric_eigen(m: &Matrix) -> (Vector, Matrix) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = Vector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub(crate) fn symmetric_eigenvalues(m: &Matrix) -> Vector {
    let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Vector::from_vec(values)
}

pub(crate) fn lambda_min(m: &Matrix) -> f64 {
    symmetric_eigenvalues(m)[0]
}

/// Smallest eigenvalue together with a unit eigenvector.
pub(crate) fn lambda_min_pair(m: &Matrix) -> (f64, Vector) {
    let (values, vectors) = sorted_symmetric_eigen(m);
    (values[0], vectors.column(0).into_owned())
}

/// Cholesky factorisation of a symmetric positive definite matrix.
pub(crate) fn cholesky(m: &Matrix) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone())
}

/// `U_Fᵀ diag(weights) U_F` computed row by row.
pub(crate) fn weighted_gram(basis: &Matrix, weights: &[f64]) -> Matrix {
    let k = basis.ncols();
    let mut out = Matrix::zeros(k, k);
    for (i, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let row = basis.row(i);
        for a in 0..k {
            let ra = w * row[a];
            for b in a..k {
                out[(a, b)] += ra * row[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            out[(a, b)] = out[(b, a)];
        }
    }
    out
}

/// Forces exact symmetry by averaging with the transpose.
pub(crate) fn symmetrize(m: &mut Matrix) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}
