use crate::linalg;
use crate::sampling::{NoiseModel, SamplingDraw};
use crate::spectral::Bandlimit;
use crate::{Matrix, Vector};

use super::{check_len, FilterError, MAX_CONDITION};

/// Graph RLS with exponential forgetting.
///
/// Keeps the weighted normal equations `Ψ ŝ = ψ` in the GFT domain:
/// `Ψ ← βΨ + U_Fᵀ D_S C_v⁻¹ U_F` and `ψ ← βψ + U_Fᵀ D_S C_v⁻¹ y`.
#[derive(Debug, Clone)]
pub struct RlsFilter {
    psi_mat: Matrix,
    psi_vec: Vector,
    forgetting: f64,
}

impl RlsFilter {
    /// `Ψ[0] = δI`, `ψ[0] = 0`.
    pub fn new(band: &Bandlimit, forgetting: f64, delta: f64) -> Result<Self, FilterError> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(FilterError::InvalidParameter(format!("regularization must be positive, got {delta}")));
        }
        let k = band.bandwidth();
        Self::with_regularizer(band, forgetting, Matrix::identity(k, k) * delta)
    }

    /// Starts from an arbitrary symmetric regularizer `Π`.
    pub fn with_regularizer(band: &Bandlimit, forgetting: f64, regularizer: Matrix) -> Result<Self, FilterError> {
        if !(forgetting > 0.0 && forgetting <= 1.0) {
            return Err(FilterError::InvalidParameter(format!("forgetting factor must lie in (0, 1], got {forgetting}")));
        }
        let k = band.bandwidth();
        check_len(k, regularizer.nrows())?;
        check_len(k, regularizer.ncols())?;
        Ok(Self { psi_mat: regularizer, psi_vec: Vector::zeros(k), forgetting })
    }

    pub fn normal_matrix(&self) -> &Matrix {
        &self.psi_mat
    }

    pub fn normal_vector(&self) -> &Vector {
        &self.psi_vec
    }

    pub fn forgetting(&self) -> f64 {
        self.forgetting
    }

    pub fn step(&mut self, y: &Vector, draw: &SamplingDraw, noise: &NoiseModel, band: &Bandlimit) -> Result<(), FilterError> {
        let n = band.node_count();
        check_len(n, y.len())?;
        check_len(n, draw.mask().len())?;
        check_len(n, noise.len())?;
        self.psi_mat *= self.forgetting;
        self.psi_vec *= self.forgetting;
        let weights: Vec<f64> = (0..n)
            .map(|i| if draw.is_sampled(i) { 1.0 / noise.variances()[i] } else { 0.0 })
            .collect();
        self.psi_mat += band.weighted_gram(&weights);
        for (i, &w) in weights.iter().enumerate().filter(|(_, &w)| w > 0.0) {
            self.psi_vec.axpy(w * y[i], &band.row(i), 1.0);
        }
        Ok(())
    }

    /// GFT-domain estimate `Ψ⁻¹ψ` via Cholesky.
    pub fn coefficients(&self) -> Result<Vector, FilterError> {
        solve_spd(&self.psi_mat, &self.psi_vec)
    }

    /// Vertex-domain estimate `U_F Ψ⁻¹ ψ`.
    pub fn estimate(&self, band: &Bandlimit) -> Result<Vector, FilterError> {
        Ok(band.basis() * self.coefficients()?)
    }
}

/// Solves `A x = b` for symmetric positive definite `A`, refusing matrices
/// whose condition number exceeds [`MAX_CONDITION`].
pub(crate) fn solve_spd(a: &Matrix, b: &Vector) -> Result<Vector, FilterError> {
    let values = linalg::symmetric_eigenvalues(a);
    let (lo, hi) = (values[0], values[values.len() - 1]);
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(FilterError::IllConditioned { condition });
    }
    let chol = linalg::cholesky(a).ok_or(FilterError::IllConditioned { condition })?;
    Ok(chol.solve(b))
}
