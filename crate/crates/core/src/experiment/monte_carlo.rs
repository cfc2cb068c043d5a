use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::distributed::{drls_run, CommGraph, DrlsConfig};
use crate::filters::{lms_msd_theory, lms_rate_theory, rls_msd_theory, LmsFilter, RlsFilter};
use crate::sampling::{draw_sampling_set, observe, NoiseModel, SamplingProbabilities};
use crate::spectral::Bandlimit;
use crate::{to_db, Vector};

use super::{resolve_sampling, ExperimentConfig, ExperimentError, Setup};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Lms,
    Rls,
    Drls,
}

/// Trial-averaged squared deviation `‖x̂[n] − x°‖²`, `n = 0..horizon`,
/// with the matching steady-state predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub msd: Vec<f64>,
    pub trials: usize,
    pub theory_msd: Option<f64>,
    pub theory_rate: Option<f64>,
}

impl LearningCurve {
    pub fn msd_db(&self) -> Vec<f64> {
        self.msd.iter().map(|&m| to_db(m)).collect()
    }

    pub fn steady_state(&self) -> f64 {
        steady_state(&self.msd)
    }

    pub fn fit_rate(&self) -> f64 {
        fit_rate(&self.msd)
    }
}

/// Mean over the final quarter of the curve (at least one point).
pub fn steady_state(curve: &[f64]) -> f64 {
    assert!(!curve.is_empty(), "empty curve");
    let tail = (curve.len() / 4).max(1);
    curve[curve.len() - tail..].iter().sum::<f64>() / tail as f64
}

/// Per-iteration geometric factor of the transient.
///
/// Regresses `10·log10(curve[n])` on `n` from the start up to the first
/// point within 3 dB of [`steady_state`] (at least two points) and returns
/// `10^(slope/10)`.
pub fn fit_rate(curve: &[f64]) -> f64 {
    if curve.len() < 2 {
        return 1.0;
    }
    let target = to_db(steady_state(curve)) + 3.0;
    let reached = curve.iter().position(|&m| to_db(m) <= target).unwrap_or(curve.len() - 1);
    let end = reached.max(1);
    let points: Vec<(f64, f64)> = (0..=end).map(|n| (n as f64, to_db(curve[n]))).collect();
    let count = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / count;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    10f64.powf(sxy / sxx / 10.0)
}

/// Runs `trial` for seeds `seed + t`, in parallel, and averages the
/// returned vectors in trial order.
pub(crate) fn monte_carlo<F>(trials: usize, seed: u64, trial: F) -> Result<Vec<f64>, ExperimentError>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Vec<f64>, ExperimentError> + Sync,
{
    let runs: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| trial(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64))))
        .collect::<Result<_, _>>()?;
    let mut sum = vec![0.0; runs.first().map_or(0, Vec::len)];
    for run in &runs {
        for (s, v) in sum.iter_mut().zip(run) {
            *s += v;
        }
    }
    Ok(sum.into_iter().map(|s| s / trials as f64).collect())
}

/// Random bandlimited signal `U_F s` with `s ~ N(0, I)`.
fn draw_signal<R: Rng + ?Sized>(band: &Bandlimit, rng: &mut R) -> Vector {
    let s = Vector::from_fn(band.bandwidth(), |_, _| rng.sample(StandardNormal));
    band.basis() * s
}

pub(crate) fn lms_trial<R: Rng + ?Sized>(
    band: &Bandlimit,
    noise: &NoiseModel,
    probs: &SamplingProbabilities,
    step: f64,
    horizon: usize,
    rng: &mut R,
) -> Result<Vec<f64>, ExperimentError> {
    let x = draw_signal(band, rng);
    let mut filter = LmsFilter::new(band, step)?;
    let mut curve = Vec::with_capacity(horizon);
    for n in 0..horizon {
        if n > 0 {
            let draw = draw_sampling_set(probs, rng);
            let y = observe(&x, &draw, noise, rng);
            filter.step(&y, &draw, band)?;
        }
        curve.push((filter.estimate() - &x).norm_squared());
    }
    Ok(curve)
}

pub(crate) fn rls_trial<R: Rng + ?Sized>(
    band: &Bandlimit,
    noise: &NoiseModel,
    probs: &SamplingProbabilities,
    forgetting: f64,
    delta: f64,
    horizon: usize,
    rng: &mut R,
) -> Result<Vec<f64>, ExperimentError> {
    let x = draw_signal(band, rng);
    let mut filter = RlsFilter::new(band, forgetting, delta)?;
    let mut curve = Vec::with_capacity(horizon);
    for n in 0..horizon {
        let estimate = if n > 0 {
            let draw = draw_sampling_set(probs, rng);
            let y = observe(&x, &draw, noise, rng);
            filter.step(&y, &draw, noise, band)?;
            filter.estimate(band)?
        } else {
            Vector::zeros(x.len())
        };
        curve.push((estimate - &x).norm_squared());
    }
    Ok(curve)
}

/// Node-major concatenation of the per-node curves of one DRLS trial.
#[allow(clippy::too_many_arguments)]
pub(crate) fn drls_trial<R: Rng + ?Sized>(
    comm: &CommGraph,
    band: &Bandlimit,
    noise: &NoiseModel,
    probs: &SamplingProbabilities,
    config: &DrlsConfig,
    horizon: usize,
    rng: &mut R,
) -> Result<Vec<f64>, ExperimentError> {
    let x = draw_signal(band, rng);
    let run = drls_run(comm, band, noise, probs, config, horizon, &x, rng)?;
    Ok(run.per_node.concat())
}

/// Result of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Network average for DRLS.
    pub curve: LearningCurve,
    /// DRLS only: trial-averaged curve of each node.
    pub per_node: Option<Vec<Vec<f64>>>,
    pub probs: SamplingProbabilities,
}

/// Monte-Carlo learning curve of one algorithm on the configured instance.
pub fn run_experiment(config: &ExperimentConfig, algorithm: Algorithm) -> Result<RunOutput, ExperimentError> {
    config.validate()?;
    let setup = Setup::build(config)?;
    let (probs, _) = resolve_sampling(&setup, config)?;
    let Setup { band, noise, .. } = &setup;
    let horizon = config.horizon;
    let p = probs.probs();
    match algorithm {
        Algorithm::Lms => {
            let step = config.lms.step;
            let msd = monte_carlo(config.trials, config.seed, |rng| lms_trial(band, noise, &probs, step, horizon, rng))?;
            let curve = LearningCurve {
                msd,
                trials: config.trials,
                theory_msd: lms_msd_theory(p, step, noise, band).ok(),
                theory_rate: Some(lms_rate_theory(p, step, band)),
            };
            Ok(RunOutput { curve, per_node: None, probs })
        }
        Algorithm::Rls => {
            let (beta, delta) = (config.rls.forgetting, config.rls.delta);
            let msd = monte_carlo(config.trials, config.seed, |rng| {
                rls_trial(band, noise, &probs, beta, delta, horizon, rng)
            })?;
            let theory = if beta < 1.0 { rls_msd_theory(p, beta, noise, band).ok() } else { None };
            let curve = LearningCurve { msd, trials: config.trials, theory_msd: theory, theory_rate: None };
            Ok(RunOutput { curve, per_node: None, probs })
        }
        Algorithm::Drls => {
            let comm = setup.comm_graph(config)?;
            let params = &config.drls;
            let drls = DrlsConfig {
                rho: params.rho,
                inner_iters: params.inner_iters,
                forgetting: params.forgetting,
                delta: params.delta,
            };
            let flat = monte_carlo(config.trials, config.seed, |rng| {
                drls_trial(&comm, band, noise, &probs, &drls, horizon, rng)
            })?;
            let per_node: Vec<Vec<f64>> = flat.chunks(horizon).map(<[f64]>::to_vec).collect();
            let nodes = per_node.len() as f64;
            let msd = (0..horizon).map(|t| per_node.iter().map(|c| c[t]).sum::<f64>() / nodes).collect();
            let beta = params.forgetting;
            let theory = if beta < 1.0 { rls_msd_theory(p, beta, noise, band).ok() } else { None };
            let curve = LearningCurve { msd, trials: config.trials, theory_msd: theory, theory_rate: None };
            Ok(RunOutput { curve, per_node: Some(per_node), probs })
        }
    }
}
