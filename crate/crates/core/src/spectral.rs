//! Graph Fourier basis and the projectors built from it.
//!
//! The basis is the eigenvector matrix `U` of the Laplacian with eigenvalues
//! in ascending order. A [`Bandlimit`] picks the columns indexed by a
//! frequency set `F`; signals in the span of those columns are
//! `F`-bandlimited.

use thiserror::Error;

use crate::linalg;
use crate::{Matrix, Vector};

const SYMMETRY_TOL: f64 = 1e-10;
const ORTHONORMAL_TOL: f64 = 1e-10;
/// Entries below this magnitude are skipped when fixing eigenvector signs.
const SIGN_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: |m[{i}][{j}] - m[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },

    #[error("frequency index {index} out of range for {size} eigenvectors")]
    FrequencyOutOfRange { index: usize, size: usize },

    #[error("frequency index {0} listed twice")]
    DuplicateFrequency(usize),

    #[error("frequency set must be nonempty")]
    EmptyFrequencySet,

    #[error("basis columns are not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Orthonormal Laplacian eigenbasis, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    eigenvalues: Vector,
    vectors: Matrix,
}

impl SpectralBasis {
    pub fn eigenvalues(&self) -> &Vector {
        &self.eigenvalues
    }

    /// Eigenvectors as columns.
    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn size(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Second-smallest eigenvalue (algebraic connectivity); zero for a
    /// single node.
    pub fn algebraic_connectivity(&self) -> f64 {
        if self.size() < 2 {
            0.0
        } else {
            self.eigenvalues[1]
        }
    }

    /// Bandlimit on the `count` lowest frequencies.
    pub fn lowest(&self, count: usize) -> Result<Bandlimit, SpectralError> {
        Bandlimit::new(self, (0..count).collect())
    }
}

/// Eigendecomposes a symmetric matrix (normally a Laplacian).
///
/// Each eigenvector is signed so that its first entry of magnitude above
/// `1e-12` is positive, which makes the basis reproducible.
pub fn eigendecompose(laplacian: &Matrix) -> Result<SpectralBasis, SpectralError> {
    let (rows, cols) = laplacian.shape();
    if rows != cols {
        return Err(SpectralError::NotSquare { rows, cols });
    }
    for i in 0..rows {
        for j in (i + 1)..rows {
            let gap = (laplacian[(i, j)] - laplacian[(j, i)]).abs();
            if gap > SYMMETRY_TOL {
                return Err(SpectralError::NotSymmetric { i, j, gap });
            }
        }
    }
    let mut sym = laplacian.clone();
    linalg::symmetrize(&mut sym);
    let (eigenvalues, mut vectors) = linalg::sorted_symmetric_eigen(&sym);
    for mut column in vectors.column_iter_mut() {
        if let Some(first) = column.iter().copied().find(|v| v.abs() > SIGN_TOL) {
            if first < 0.0 {
                column.neg_mut();
            }
        }
    }
    Ok(SpectralBasis { eigenvalues, vectors })
}

/// Frequency support `F` and the matching basis columns `U_F`.
#[derive(Debug, Clone)]
pub struct Bandlimit {
    freq_set: Vec<usize>,
    basis_slice: Matrix,
}

impl Bandlimit {
    /// Selects columns of `basis` in the order given by `freq_set`.
    pub fn new(basis: &SpectralBasis, freq_set: Vec<usize>) -> Result<Self, SpectralError> {
        let size = basis.size();
        if freq_set.is_empty() {
            return Err(SpectralError::EmptyFrequencySet);
        }
        let mut seen = vec![false; size];
        for &index in &freq_set {
            if index >= size {
                return Err(SpectralError::FrequencyOutOfRange { index, size });
            }
            if seen[index] {
                return Err(SpectralError::DuplicateFrequency(index));
            }
            seen[index] = true;
        }
        let basis_slice = basis.vectors.select_columns(freq_set.iter());
        Ok(Self { freq_set, basis_slice })
    }

    /// Wraps an arbitrary matrix with orthonormal columns, for subspaces not
    /// derived from a Laplacian.
    pub fn from_columns(columns: Matrix) -> Result<Self, SpectralError> {
        let k = columns.ncols();
        if k == 0 || columns.nrows() == 0 {
            return Err(SpectralError::EmptyFrequencySet);
        }
        let deviation = (columns.transpose() * &columns - Matrix::identity(k, k)).amax();
        if deviation > ORTHONORMAL_TOL {
            return Err(SpectralError::NotOrthonormal(deviation));
        }
        Ok(Self { freq_set: (0..k).collect(), basis_slice: columns })
    }

    pub fn freq_set(&self) -> &[usize] {
        &self.freq_set
    }

    /// `U_F`, an `n × |F|` matrix with orthonormal columns.
    pub fn basis(&self) -> &Matrix {
        &self.basis_slice
    }

    /// `|F|`.
    pub fn bandwidth(&self) -> usize {
        self.basis_slice.ncols()
    }

    pub fn node_count(&self) -> usize {
        self.basis_slice.nrows()
    }

    /// Row `i` of `U_F` as a column vector.
    pub fn row(&self, i: usize) -> Vector {
        self.basis_slice.row(i).transpose()
    }

    /// Squared row norms `‖u_{F,i}‖²` (leverage scores).
    pub fn row_energies(&self) -> Vec<f64> {
        self.basis_slice.row_iter().map(|r| r.norm_squared()).collect()
    }

    /// `U_Fᵀ diag(weights) U_F`.
    pub fn weighted_gram(&self, weights: &[f64]) -> Matrix {
        linalg::weighted_gram(&self.basis_slice, weights)
    }

    /// Signal with GFT coefficients `s` on `F`: `x = U_F s`.
    pub fn synthesize(&self, coefficients: &Vector) -> Result<Vector, SpectralError> {
        check_len(self.bandwidth(), coefficients.len())?;
        Ok(&self.basis_slice * coefficients)
    }

    /// Coefficients on `F` of a vertex signal: `U_Fᵀ x`.
    pub fn coefficients(&self, x: &Vector) -> Result<Vector, SpectralError> {
        check_len(self.node_count(), x.len())?;
        Ok(self.basis_slice.tr_mul(x))
    }

    /// Projection onto the bandlimited subspace, `U_F(U_Fᵀ x)`.
    pub fn project(&self, x: &Vector) -> Result<Vector, SpectralError> {
        let s = self.coefficients(x)?;
        Ok(&self.basis_slice * s)
    }

    /// Dense projector `B_F = U_F U_Fᵀ`.
    pub fn projector(&self) -> Matrix {
        &self.basis_slice * self.basis_slice.transpose()
    }
}

fn check_len(expected: usize, found: usize) -> Result<(), SpectralError> {
    if expected != found {
        return Err(SpectralError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `x = U_F s`.
pub fn synthesize(band: &Bandlimit, coefficients: &Vector) -> Result<Vector, SpectralError> {
    band.synthesize(coefficients)
}

/// Full graph Fourier transform `s = Uᵀ x`.
pub fn analyze(basis: &SpectralBasis, x: &Vector) -> Result<Vector, SpectralError> {
    check_len(basis.size(), x.len())?;
    Ok(basis.vectors.tr_mul(x))
}

/// Band projector `B_F = U_F U_Fᵀ`.
pub fn bandlimit_projector(band: &Bandlimit) -> Matrix {
    band.projector()
}

/// Vertex-limiting operator `D_S = diag(1_S)`. Indices outside `0..n` are
/// ignored.
pub fn vertex_limiter(set: &[usize], n: usize) -> Matrix {
    let mut d = Matrix::zeros(n, n);
    for &i in set.iter().filter(|&&i| i < n) {
        d[(i, i)] = 1.0;
    }
    d
}
