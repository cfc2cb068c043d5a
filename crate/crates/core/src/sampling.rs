//! Random vertex sampling, noisy observations and the sampling baselines.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::linalg;
use crate::spectral::Bandlimit;
use crate::{Matrix, Vector};

/// Ranks below this eigenvalue are treated as zero by the greedy selector.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum SamplingError {
    #[error("probability {value} at node {node} outside [0, {bound}]")]
    ProbabilityOutOfRange { node: usize, value: f64, bound: f64 },

    #[error("upper bound {value} at node {node} outside [0, 1]")]
    BoundOutOfRange { node: usize, value: f64 },

    #[error("noise variance {value} at node {node} must be positive and finite")]
    InvalidVariance { node: usize, value: f64 },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("requested {requested} nodes but the graph has only {available}")]
    TooManyNodes { requested: usize, available: usize },
}

/// Per-node sampling probabilities `p` with their upper bounds `p_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingProbabilities {
    probs: Vec<f64>,
    bounds: Vec<f64>,
}

impl SamplingProbabilities {
    pub fn new(probs: Vec<f64>, bounds: Vec<f64>) -> Result<Self, SamplingError> {
        if probs.len() != bounds.len() {
            return Err(SamplingError::LengthMismatch { expected: bounds.len(), found: probs.len() });
        }
        for (node, &value) in bounds.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(SamplingError::BoundOutOfRange { node, value });
            }
        }
        for (node, (&value, &bound)) in probs.iter().zip(&bounds).enumerate() {
            if !(0.0..=bound).contains(&value) {
                return Err(SamplingError::ProbabilityOutOfRange { node, value, bound });
            }
        }
        Ok(Self { probs, bounds })
    }

    /// Probabilities with every bound equal to one.
    pub fn unbounded(probs: Vec<f64>) -> Result<Self, SamplingError> {
        let n = probs.len();
        Self::new(probs, vec![1.0; n])
    }

    /// Probability one at every node.
    pub fn full(n: usize) -> Self {
        Self { probs: vec![1.0; n], bounds: vec![1.0; n] }
    }

    /// Probability one on `set`, zero elsewhere. Out-of-range indices are an
    /// error.
    pub fn from_set(n: usize, set: &[usize]) -> Result<Self, SamplingError> {
        let mut probs = vec![0.0; n];
        for &i in set {
            if i >= n {
                return Err(SamplingError::LengthMismatch { expected: n, found: i + 1 });
            }
            probs[i] = 1.0;
        }
        Ok(Self { probs, bounds: vec![1.0; n] })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Expected number of samples per step, `1ᵀp`.
    pub fn expected_count(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Expected sampling set `{i : p_i > 0}`.
    pub fn support(&self) -> Vec<usize> {
        self.support_above(0.0)
    }

    /// Nodes whose probability exceeds `threshold`.
    pub fn support_above(&self, threshold: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.probs[i] > threshold).collect()
    }
}

/// One realisation of the random sampling mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingDraw {
    mask: Vec<bool>,
}

impl SamplingDraw {
    pub fn new(mask: Vec<bool>) -> Self {
        Self { mask }
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_sampled(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Mask as a 0/1 vector.
    pub fn as_weights(&self) -> Vec<f64> {
        self.mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect()
    }
}

/// Diagonal observation-noise covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    variances: Vec<f64>,
}

impl NoiseModel {
    pub fn new(variances: Vec<f64>) -> Result<Self, SamplingError> {
        for (node, &value) in variances.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SamplingError::InvalidVariance { node, value });
            }
        }
        Ok(Self { variances })
    }

    /// Same variance at every node.
    pub fn white(n: usize, variance: f64) -> Result<Self, SamplingError> {
        Self::new(vec![variance; n])
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn len(&self) -> usize {
        self.variances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variances.is_empty()
    }
}

/// Independent Bernoulli draw per node.
pub fn draw_sampling_set<R: Rng + ?Sized>(p: &SamplingProbabilities, rng: &mut R) -> SamplingDraw {
    SamplingDraw { mask: p.probs.iter().map(|&pi| rng.random::<f64>() < pi).collect() }
}

/// Noisy samples `y_i = d_i (x_i + v_i)` with Gaussian `v_i`.
///
/// Noise is drawn only at sampled nodes; unsampled entries are exactly zero.
pub fn observe<R: Rng + ?Sized>(x_true: &Vector, draw: &SamplingDraw, noise: &NoiseModel, rng: &mut R) -> Vector {
    let mut y = Vector::zeros(x_true.len());
    for i in 0..x_true.len() {
        if draw.mask[i] {
            let sd = noise.variances[i].sqrt();
            let v = Normal::new(0.0, sd).expect("variance validated positive").sample(rng);
            y[i] = x_true[i] + v;
        }
    }
    y
}

/// `λ_min(U_Fᵀ diag(p) U_F)`; positive iff the band is recoverable.
pub fn reconstructability_lambda(p: &[f64], band: &Bandlimit) -> f64 {
    linalg::lambda_min(&band.weighted_gram(p))
}

/// `‖D_{S̄c} U_F‖₂`, the spectral norm of `U_F` restricted to the nodes
/// outside `expected_set`. Below one iff the band is recoverable from
/// `expected_set`.
pub fn localization_norm(expected_set: &[usize], band: &Bandlimit) -> f64 {
    let n = band.node_count();
    let mut outside = vec![1.0; n];
    for &i in expected_set.iter().filter(|&&i| i < n) {
        outside[i] = 0.0;
    }
    let gram = band.weighted_gram(&outside);
    let top = linalg::symmetric_eigenvalues(&gram);
    top[top.len() - 1].max(0.0).sqrt()
}

/// Leverage-score probabilities `p_i = min(1, m ‖u_i‖² / |F|)`.
pub fn leverage_score_probabilities(band: &Bandlimit, m: f64) -> Result<SamplingProbabilities, SamplingError> {
    let n = band.node_count();
    if m > n as f64 {
        return Err(SamplingError::TooManyNodes { requested: m.ceil() as usize, available: n });
    }
    let k = band.bandwidth() as f64;
    let probs = band.row_energies().into_iter().map(|e| (m * e / k).clamp(0.0, 1.0)).collect();
    SamplingProbabilities::unbounded(probs)
}

/// Nodes sorted by leverage score, largest first (ties by lowest index).
pub fn leverage_order(band: &Bandlimit) -> Vec<usize> {
    let scores = band.row_energies();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Rank and log pseudo-determinant of a PSD matrix.
fn rank_log_pdet(m: &Matrix) -> (usize, f64) {
    let values = linalg::symmetric_eigenvalues(m);
    values
        .iter()
        .filter(|&&v| v > RANK_TOL)
        .fold((0, 0.0), |(r, acc), &v| (r + 1, acc + v.ln()))
}

/// Greedy Max-Det selection of `m` nodes.
///
/// Each step adds the node that maximises `det(U_Fᵀ D_S U_F)`. While the
/// sampled Gram matrix is rank deficient, rank is compared first and the
/// product of nonzero eigenvalues breaks ties; remaining ties go to the
/// lowest index.
pub fn max_det_greedy(band: &Bandlimit, m: usize) -> Result<Vec<usize>, SamplingError> {
    let n = band.node_count();
    if m > n {
        return Err(SamplingError::TooManyNodes { requested: m, available: n });
    }
    Ok(max_det_order(band).into_iter().take(m).collect())
}

/// Full greedy Max-Det ordering of every node.
pub fn max_det_order(band: &Bandlimit) -> Vec<usize> {
    let n = band.node_count();
    let k = band.bandwidth();
    let mut chosen = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut gram = Matrix::zeros(k, k);
    for _ in 0..n {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in (0..n).filter(|&i| !used[i]) {
            let u = band.row(i);
            let candidate = &gram + &u * u.transpose();
            let (rank, logdet) = rank_log_pdet(&candidate);
            let better = match best {
                None => true,
                Some((_, r, l)) => rank > r || (rank == r && logdet > l + RANK_TOL),
            };
            if better {
                best = Some((i, rank, logdet));
            }
        }
        let (i, _, _) = best.expect("at least one unused node");
        used[i] = true;
        let u = band.row(i);
        gram += &u * u.transpose();
        chosen.push(i);
    }
    chosen
}

/// `m` distinct nodes chosen uniformly without replacement.
pub fn uniform_random_set<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Vec<usize>, SamplingError> {
    if m > n {
        return Err(SamplingError::TooManyNodes { requested: m, available: n });
    }
    Ok(index::sample(rng, n, m).into_vec())
}
