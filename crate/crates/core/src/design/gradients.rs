//! Derivatives of the LMS design functions with respect to the sampling
//! probabilities.

use crate::filters::{noise_gram, sampling_gram, FilterError};
use crate::linalg;
use crate::sampling::NoiseModel;
use crate::spectral::Bandlimit;
use crate::Vector;

/// Gradient of `p ↦ (μ/2) tr(H(p)⁻¹ G(p))`.
///
/// Component `i` is `(μ/2)(σ_i² u_iᵀH⁻¹u_i − u_iᵀH⁻¹GH⁻¹u_i)`.
pub fn msd_gradient(p: &[f64], step: f64, noise: &NoiseModel, band: &Bandlimit) -> Result<Vector, FilterError> {
    let h = sampling_gram(p, band);
    let g = noise_gram(p, noise, band);
    let lambda_min = linalg::lambda_min(&h);
    let chol = linalg::cholesky(&h)
        .filter(|_| lambda_min > 1e-12)
        .ok_or(FilterError::NotReconstructable { lambda_min })?;
    // rows of H⁻¹ U_Fᵀ as columns
    let solved = chol.solve(&band.basis().transpose());
    let weighted = &g * &solved;
    let n = band.node_count();
    Ok(Vector::from_iterator(
        n,
        (0..n).map(|i| {
            let hu = solved.column(i);
            let quad = band.basis().row(i).dot(&hu.transpose());
            let cross = hu.dot(&weighted.column(i));
            0.5 * step * (noise.variances()[i] * quad - cross)
        }),
    ))
}

/// Supergradient of the concave map `p ↦ λ_min(H(p))`: `(v_minᵀ u_i)²`
/// for a unit eigenvector `v_min` of the smallest eigenvalue.
pub fn lambda_min_subgradient(p: &[f64], band: &Bandlimit) -> Vector {
    let (_, v) = linalg::lambda_min_pair(&sampling_gram(p, band));
    let projections = band.basis() * v;
    projections.map(|x| x * x)
}
