//! LMS and RLS estimators for bandlimited graph signals and their
//! closed-form steady-state theory.

mod lms;
mod rls;
mod theory;

use thiserror::Error;

pub use lms::LmsFilter;
pub use rls::RlsFilter;
pub use theory::{
    lms_msd_theory, lms_msd_upper_bound, lms_rate_theory, lms_step_bound, lms_theory_report, noise_gram,
    rls_msd_theory, rls_normal_matrix, sampling_gram, TheoryReport,
};

/// Largest accepted condition number of the RLS normal matrix.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sampling does not allow reconstruction of the band (smallest eigenvalue {lambda_min:e})")]
    NotReconstructable { lambda_min: f64 },

    #[error("normal matrix is numerically singular (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<(), FilterError> {
    if expected != found {
        return Err(FilterError::DimensionMismatch { expected, found });
    }
    Ok(())
}
