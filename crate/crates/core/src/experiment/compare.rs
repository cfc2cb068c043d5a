use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::design::{sca_min_rate, solve_min_rate_convex, DesignError, DesignSpec, ScaOptions};
use crate::filters::{lms_msd_theory, noise_gram, sampling_gram};
use crate::from_db;
use crate::linalg;
use crate::sampling::{leverage_order, max_det_order};

use super::{ExperimentConfig, ExperimentError, Setup, Solver};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Designed,
    MaxDet,
    Leverage,
    UniformRandom,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Designed, Strategy::MaxDet, Strategy::Leverage, Strategy::UniformRandom];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Designed => "designed",
            Strategy::MaxDet => "max_det",
            Strategy::Leverage => "leverage",
            Strategy::UniformRandom => "uniform_random",
        }
    }
}

/// One row of the comparison table. Rates are `NaN` when no sampling set
/// of that strategy meets the constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub alpha: f64,
    pub strategy: Strategy,
    pub sampling_rate_mean: f64,
    pub sampling_rate_std: f64,
    pub trials: usize,
}

/// Whether a full-probability node set meets the constraints the designed
/// strategy was solved under.
fn meets(spec: &DesignSpec, solver: Solver, p: &[f64]) -> bool {
    let h = sampling_gram(p, &spec.band);
    let lambda = linalg::lambda_min(&h);
    if !(lambda >= spec.required_lambda() && lambda > 1e-12) {
        return false;
    }
    if spec.msd_target.is_infinite() {
        return true;
    }
    let msd = match solver {
        Solver::ScaMinRate => lms_msd_theory(p, spec.step, &spec.noise, &spec.band).unwrap_or(f64::INFINITY),
        _ => 0.5 * spec.step * noise_gram(p, &spec.noise, &spec.band).trace() / lambda,
    };
    msd <= spec.msd_target
}

/// Nodes added in `order` (probability one each) until the constraints hold.
fn nodes_needed(spec: &DesignSpec, solver: Solver, order: &[usize]) -> Option<usize> {
    let mut p = vec![0.0; spec.node_count()];
    for (count, &i) in order.iter().enumerate() {
        p[i] = 1.0;
        if meets(spec, solver, &p) {
            return Some(count + 1);
        }
    }
    None
}

fn row(alpha: f64, strategy: Strategy, counts: &[Option<usize>]) -> CompareRow {
    let trials = counts.len();
    let values: Option<Vec<f64>> = counts.iter().map(|c| c.map(|v| v as f64)).collect();
    let (mean, std) = match values {
        Some(v) => {
            let mean = v.iter().sum::<f64>() / trials as f64;
            let var = if trials > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64 } else { 0.0 };
            (mean, var.sqrt())
        }
        None => (f64::NAN, f64::NAN),
    };
    CompareRow { alpha, strategy, sampling_rate_mean: mean, sampling_rate_std: std, trials }
}

/// Minimal sampling rate `1ᵀp` per strategy and rate target.
///
/// Baselines switch nodes on with probability one in their own order until
/// the (rate, MSD) constraints of the chosen solver hold; the uniform
/// baseline averages `random_permutations` shuffles seeded `seed + r`.
pub fn compare_sampling(setup: &Setup, config: &ExperimentConfig) -> Result<Vec<CompareRow>, ExperimentError> {
    let params = &config.compare;
    let n = setup.node_count();
    let max_det = max_det_order(&setup.band);
    let leverage = leverage_order(&setup.band);
    let shuffles: Vec<Vec<usize>> = (0..params.random_permutations)
        .map(|r| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(r as u64)));
            order
        })
        .collect();
    let mut rows = Vec::with_capacity(4 * params.alphas.len());
    for &alpha in &params.alphas {
        let mut spec = setup.design_spec(config);
        spec.rate_target = alpha;
        spec.msd_target = params.msd_target_db.map_or(f64::INFINITY, from_db);
        let designed = match params.solver {
            Solver::ScaMinRate => sca_min_rate(&spec, &ScaOptions::default()),
            _ => solve_min_rate_convex(&spec),
        };
        let designed_rate = match designed {
            Ok(design) => design.sampling_rate(),
            Err(DesignError::RateInfeasible { .. } | DesignError::MsdInfeasible { .. }) => f64::NAN,
            Err(e) => return Err(e.into()),
        };
        rows.push(CompareRow {
            alpha,
            strategy: Strategy::Designed,
            sampling_rate_mean: designed_rate,
            sampling_rate_std: if designed_rate.is_nan() { f64::NAN } else { 0.0 },
            trials: 1,
        });
        rows.push(row(alpha, Strategy::MaxDet, &[nodes_needed(&spec, params.solver, &max_det)]));
        rows.push(row(alpha, Strategy::Leverage, &[nodes_needed(&spec, params.solver, &leverage)]));
        let random: Vec<Option<usize>> = shuffles.iter().map(|o| nodes_needed(&spec, params.solver, o)).collect();
        rows.push(row(alpha, Strategy::UniformRandom, &random));
    }
    Ok(rows)
}
