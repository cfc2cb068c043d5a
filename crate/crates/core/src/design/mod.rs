//! Sampling-probability design.
//!
//! | Solver | Problem |
//! |--------|---------|
//! | [`solve_min_rate_convex`] | min `1ᵀp` under a rate target and the trace/λ_min bound on the LMS MSD |
//! | [`sca_min_rate`] | min `1ᵀp` under a rate target and the exact LMS MSD (successive convex approximation) |
//! | [`dinkelbach_min_msd`] | min of the MSD bound under rate and budget constraints (fractional program) |
//! | [`sca_min_msd`] | min of the exact LMS MSD under rate and budget constraints (successive convex approximation) |
//! | [`solve_rls_design`] | min `1ᵀp` under an RLS MSD target |
//!
//! Convex subproblems are solved with a log-barrier interior-point method.

pub(crate) mod barrier;
mod dinkelbach;
mod gradients;
mod min_rate;
mod rls_design;
mod sca;

use thiserror::Error;

use crate::filters::{lms_msd_theory, FilterError};
use crate::linalg;
use crate::sampling::{NoiseModel, SamplingProbabilities};
use crate::spectral::Bandlimit;
use crate::{Matrix, Vector};

use barrier::{BarrierError, Lmi};

pub use dinkelbach::dinkelbach_min_msd;
pub use gradients::{lambda_min_subgradient, msd_gradient};
pub use min_rate::solve_min_rate_convex;
pub use rls_design::solve_rls_design;
pub use sca::{sca_min_msd, sca_min_rate, sca_surrogate, sca_surrogate_gradient, ScaOptions};

/// Probabilities at or below this are reported as zero.
pub const REPORT_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("invalid design parameters: {0}")]
    InvalidSpec(String),

    #[error("rate target needs smallest eigenvalue {required:e} but at most {achievable:e} is achievable")]
    RateInfeasible { required: f64, achievable: f64 },

    #[error("MSD target {target:e} is not achievable (best achievable {achievable:e})")]
    MsdInfeasible { target: f64, achievable: f64 },

    #[error("constraints admit no strictly feasible point: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Filter(#[from] FilterError),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl From<BarrierError> for DesignError {
    fn from(err: BarrierError) -> Self {
        match err {
            BarrierError::Infeasible { .. } => DesignError::Infeasible(err.to_string()),
            other => DesignError::Numerical(other.to_string()),
        }
    }
}

/// Inputs shared by the design problems.
///
/// `step` and `rate_target` matter for LMS designs, `forgetting` for the RLS
/// design. `msd_target` is linear, not in dB.
#[derive(Debug, Clone)]
pub struct DesignSpec {
    pub band: Bandlimit,
    pub noise: NoiseModel,
    pub step: f64,
    pub forgetting: f64,
    pub rate_target: f64,
    pub msd_target: f64,
    pub budget: f64,
    pub bounds: Vec<f64>,
}

impl DesignSpec {
    /// Unit bounds, budget equal to the node count, `μ = 0.1`, `β = 0.95`,
    /// `ᾱ = 0.99` and no MSD target.
    pub fn new(band: Bandlimit, noise: NoiseModel) -> Self {
        let n = band.node_count();
        Self {
            band,
            noise,
            step: 0.1,
            forgetting: 0.95,
            rate_target: 0.99,
            msd_target: f64::INFINITY,
            budget: n as f64,
            bounds: vec![1.0; n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.band.node_count()
    }

    /// Smallest eigenvalue of `H(p)` that meets the rate target,
    /// `(1 − ᾱ) / (2μ)`.
    pub fn required_lambda(&self) -> f64 {
        (1.0 - self.rate_target) / (2.0 * self.step)
    }

    pub fn validate(&self) -> Result<(), DesignError> {
        let n = self.node_count();
        let invalid = |msg: String| Err(DesignError::InvalidSpec(msg));
        if self.noise.len() != n {
            return invalid(format!("{} noise variances for {n} nodes", self.noise.len()));
        }
        if self.bounds.len() != n {
            return invalid(format!("{} probability bounds for {n} nodes", self.bounds.len()));
        }
        if let Some(b) = self.bounds.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return invalid(format!("probability bound {b} outside [0, 1]"));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return invalid(format!("step size {} must be positive", self.step));
        }
        if !(self.forgetting > 0.0 && self.forgetting < 1.0) {
            return invalid(format!("forgetting factor {} outside (0, 1)", self.forgetting));
        }
        if !(self.rate_target > 0.0 && self.rate_target < 1.0) {
            return invalid(format!("rate target {} outside (0, 1)", self.rate_target));
        }
        if !(self.msd_target > 0.0) {
            return invalid(format!("MSD target {} must be positive", self.msd_target));
        }
        let total: f64 = self.bounds.iter().sum();
        if !(self.budget >= 0.0 && self.budget <= total + 1e-12) {
            return invalid(format!("budget {} outside [0, {total}]", self.budget));
        }
        Ok(())
    }

    /// Exact LMS MSD at `p`, `+∞` where the band is not recoverable.
    pub(crate) fn lms_msd(&self, p: &[f64]) -> f64 {
        lms_msd_theory(p, self.step, &self.noise, &self.band).unwrap_or(f64::INFINITY)
    }

    /// `(μ/2) tr(G)/λ_min(H)`, `+∞` where `H` is numerically singular.
    pub(crate) fn lms_msd_bound(&self, p: &[f64]) -> f64 {
        let lambda = linalg::lambda_min(&self.band.weighted_gram(p));
        if lambda <= 1e-12 {
            return f64::INFINITY;
        }
        0.5 * self.step * self.noise_trace(p) / lambda
    }

    /// `tr(U_Fᵀ diag(p) C_v U_F) = Σ p_i σ_i² ‖u_i‖²`.
    pub(crate) fn noise_trace(&self, p: &[f64]) -> f64 {
        self.band
            .row_energies()
            .iter()
            .zip(self.noise.variances())
            .zip(p)
            .map(|((e, s), pi)| pi * s * e)
            .sum()
    }

    pub(crate) fn lambda_min(&self, p: &[f64]) -> f64 {
        linalg::lambda_min(&self.band.weighted_gram(p))
    }
}

/// One recorded solver iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub probs: Vec<f64>,
    /// Value of the problem's own objective.
    pub objective: f64,
    /// Exact LMS MSD at `probs` (RLS MSD for the RLS design).
    pub msd: f64,
    /// Largest constraint violation, zero when feasible.
    pub violation: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    pub entries: Vec<TraceEntry>,
    pub converged: bool,
    pub iterations: usize,
}

/// Solver output: the designed probabilities and how they were reached.
#[derive(Debug, Clone)]
pub struct Design {
    pub probs: SamplingProbabilities,
    pub trace: SolverTrace,
}

impl Design {
    /// Nodes whose probability exceeds [`REPORT_THRESHOLD`].
    pub fn expected_set(&self) -> Vec<usize> {
        self.probs.support_above(REPORT_THRESHOLD)
    }

    pub fn sampling_rate(&self) -> f64 {
        self.probs.expected_count()
    }
}

/// Probabilities with every entry at or below [`REPORT_THRESHOLD`] set to
/// zero, as written to reports.
pub fn truncate_for_report(p: &[f64]) -> Vec<f64> {
    p.iter().map(|&x| if x <= REPORT_THRESHOLD { 0.0 } else { x }).collect()
}

/// Problem restricted to nodes with a positive upper bound.
pub(crate) struct Reduced {
    n: usize,
    pub nodes: Vec<usize>,
    /// Rows `u_i` of `U_F` for the free nodes.
    pub rows: Matrix,
    pub variances: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Reduced {
    pub fn new(spec: &DesignSpec) -> Self {
        let nodes: Vec<usize> = (0..spec.node_count()).filter(|&i| spec.bounds[i] > 0.0).collect();
        let rows = spec.band.basis().select_rows(nodes.iter());
        Self {
            n: spec.node_count(),
            variances: nodes.iter().map(|&i| spec.noise.variances()[i]).collect(),
            upper: nodes.iter().map(|&i| spec.bounds[i]).collect(),
            nodes,
            rows,
        }
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn bandwidth(&self) -> usize {
        self.rows.ncols()
    }

    pub fn lower(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }

    /// Full-length probabilities, clamped into the box.
    pub fn expand(&self, x: &Vector) -> Vec<f64> {
        let mut p = vec![0.0; self.n];
        for (j, &i) in self.nodes.iter().enumerate() {
            p[i] = x[j].clamp(0.0, self.upper[j]);
        }
        p
    }

    pub fn restrict(&self, p: &[f64]) -> Vector {
        Vector::from_iterator(self.dim(), self.nodes.iter().map(|&i| p[i]))
    }

    pub fn row(&self, j: usize) -> Vector {
        self.rows.row(j).transpose()
    }

    pub fn outer(&self, j: usize) -> Matrix {
        let u = self.row(j);
        &u * u.transpose()
    }

    /// `H(x) − shift·I ≻ 0`.
    pub fn lambda_lmi(&self, shift: f64) -> Lmi {
        let k = self.bandwidth();
        Lmi { constant: Matrix::identity(k, k) * -shift, coefficients: (0..self.dim()).map(|j| self.outer(j)).collect() }
    }

    /// Upper point of the box.
    pub fn upper_vector(&self) -> Vector {
        Vector::from_column_slice(&self.upper)
    }
}

/// Checks that the rate target can be met at `p = p_max`.
pub(crate) fn check_rate_feasible(spec: &DesignSpec) -> Result<(), DesignError> {
    let required = spec.required_lambda();
    let achievable = spec.lambda_min(&spec.bounds);
    if achievable <= required {
        return Err(DesignError::RateInfeasible { required, achievable });
    }
    Ok(())
}

pub(crate) fn to_probabilities(spec: &DesignSpec, p: Vec<f64>) -> Result<SamplingProbabilities, DesignError> {
    SamplingProbabilities::new(p, spec.bounds.clone()).map_err(|e| DesignError::Numerical(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::spectral::eigendecompose;

    fn spec() -> DesignSpec {
        let band = eigendecompose(&Graph::path(3).unwrap().laplacian()).unwrap().lowest(2).unwrap();
        DesignSpec::new(band, NoiseModel::white(3, 0.01).unwrap())
    }

    #[test]
    fn validation() {
        assert!(spec().validate().is_ok());
        let mut s = spec();
        s.rate_target = 1.0;
        assert!(s.validate().is_err());
        let mut s = spec();
        s.budget = 3.5;
        assert!(s.validate().is_err());
        let mut s = spec();
        s.bounds = vec![1.0, 1.2, 0.0];
        assert!(s.validate().is_err());
        let mut s = spec();
        s.msd_target = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn reduced_problem_drops_zero_bounds() {
        let mut s = spec();
        s.bounds = vec![1.0, 0.0, 0.5];
        let r = Reduced::new(&s);
        assert_eq!(r.nodes, vec![0, 2]);
        assert_eq!(r.expand(&Vector::from_vec(vec![0.3, 0.9])), vec![0.3, 0.0, 0.5]);
        assert_eq!(r.restrict(&[0.1, 0.2, 0.3]), Vector::from_vec(vec![0.1, 0.3]));
    }

    #[test]
    fn truncation() {
        assert_eq!(truncate_for_report(&[1e-10, 0.5, 1e-9, 2e-9]), vec![0.0, 0.5, 0.0, 2e-9]);
    }

    #[test]
    fn bound_dominates_exact_msd() {
        let s = spec();
        let p = [0.9, 0.4, 0.7];
        assert!(s.lms_msd_bound(&p) >= s.lms_msd(&p));
        assert_eq!(s.lms_msd_bound(&[1.0, 0.0, 0.0]), f64::INFINITY);
    }
}
