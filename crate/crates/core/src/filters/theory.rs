//! Closed-form steady-state behaviour of the graph LMS and RLS estimators.
//!
//! With `H(p) = U_Fᵀ diag(p) U_F` and `G(p) = U_Fᵀ diag(p) C_v U_F`:
//!
//! * LMS mean-square deviation `(μ/2) tr(H⁻¹ G)` (first order in `μ`),
//! * LMS convergence rate `1 − 2μ λ_min(H)`,
//! * LMS stability bound on `μ`, `2 λ_min(H) / λ_max(H)²`,
//! * RLS mean-square deviation `((1−β)/(1+β)) tr((U_Fᵀ diag(p) C_v⁻¹ U_F)⁻¹)`.

use crate::linalg;
use crate::sampling::NoiseModel;
use crate::spectral::Bandlimit;
use crate::Matrix;

use super::{check_len, FilterError};

/// Smallest eigenvalue treated as invertible by the theory functions.
const INVERTIBLE_TOL: f64 = 1e-12;

/// `H(p) = U_Fᵀ diag(p) U_F`.
pub fn sampling_gram(p: &[f64], band: &Bandlimit) -> Matrix {
    band.weighted_gram(p)
}

/// `G(p) = U_Fᵀ diag(p) C_v U_F`.
pub fn noise_gram(p: &[f64], noise: &NoiseModel, band: &Bandlimit) -> Matrix {
    let w: Vec<f64> = p.iter().zip(noise.variances()).map(|(pi, s)| pi * s).collect();
    band.weighted_gram(&w)
}

/// `U_Fᵀ diag(p) C_v⁻¹ U_F`.
pub fn rls_normal_matrix(p: &[f64], noise: &NoiseModel, band: &Bandlimit) -> Matrix {
    let w: Vec<f64> = p.iter().zip(noise.variances()).map(|(pi, s)| pi / s).collect();
    band.weighted_gram(&w)
}

fn check_inputs(p: &[f64], noise: Option<&NoiseModel>, band: &Bandlimit) -> Result<(), FilterError> {
    check_len(band.node_count(), p.len())?;
    if let Some(noise) = noise {
        check_len(band.node_count(), noise.len())?;
    }
    Ok(())
}

/// `tr(A⁻¹ B)` for symmetric positive definite `A`.
fn trace_solve(a: &Matrix, b: &Matrix) -> Result<f64, FilterError> {
    let lambda_min = linalg::lambda_min(a);
    if lambda_min <= INVERTIBLE_TOL {
        return Err(FilterError::NotReconstructable { lambda_min });
    }
    let chol = linalg::cholesky(a).ok_or(FilterError::NotReconstructable { lambda_min })?;
    Ok(chol.solve(b).trace())
}

/// `2 λ_min(H) / λ_max(H)²`; zero when nothing is sampled.
pub fn lms_step_bound(p: &[f64], band: &Bandlimit) -> f64 {
    let values = linalg::symmetric_eigenvalues(&sampling_gram(p, band));
    let (lo, hi) = (values[0], values[values.len() - 1]);
    if hi <= 0.0 {
        0.0
    } else {
        2.0 * lo.max(0.0) / (hi * hi)
    }
}

/// `(μ/2) tr(H⁻¹ G)`.
pub fn lms_msd_theory(p: &[f64], step: f64, noise: &NoiseModel, band: &Bandlimit) -> Result<f64, FilterError> {
    check_inputs(p, Some(noise), band)?;
    let h = sampling_gram(p, band);
    let g = noise_gram(p, noise, band);
    Ok(0.5 * step * trace_solve(&h, &g)?)
}

/// `1 − 2μ λ_min(H)`.
pub fn lms_rate_theory(p: &[f64], step: f64, band: &Bandlimit) -> f64 {
    1.0 - 2.0 * step * linalg::lambda_min(&sampling_gram(p, band))
}

/// `(μ/2) tr(G) / λ_min(H)`, an upper bound on [`lms_msd_theory`].
pub fn lms_msd_upper_bound(p: &[f64], step: f64, noise: &NoiseModel, band: &Bandlimit) -> Result<f64, FilterError> {
    check_inputs(p, Some(noise), band)?;
    let lambda_min = linalg::lambda_min(&sampling_gram(p, band));
    if lambda_min <= INVERTIBLE_TOL {
        return Err(FilterError::NotReconstructable { lambda_min });
    }
    Ok(0.5 * step * noise_gram(p, noise, band).trace() / lambda_min)
}

/// `((1−β)/(1+β)) tr((U_Fᵀ diag(p) C_v⁻¹ U_F)⁻¹)`.
pub fn rls_msd_theory(p: &[f64], forgetting: f64, noise: &NoiseModel, band: &Bandlimit) -> Result<f64, FilterError> {
    check_inputs(p, Some(noise), band)?;
    let j = rls_normal_matrix(p, noise, band);
    let k = band.bandwidth();
    let factor = (1.0 - forgetting) / (1.0 + forgetting);
    Ok(factor * trace_solve(&j, &Matrix::identity(k, k))?)
}

/// LMS theory summary for one sampling design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryReport {
    pub msd: f64,
    pub rate: f64,
    pub step_bound: f64,
}

pub fn lms_theory_report(p: &[f64], step: f64, noise: &NoiseModel, band: &Bandlimit) -> Result<TheoryReport, FilterError> {
    Ok(TheoryReport {
        msd: lms_msd_theory(p, step, noise, band)?,
        rate: lms_rate_theory(p, step, band),
        step_bound: lms_step_bound(p, band),
    })
}
