//! Acceptance runner. Prints one `AC-k PASS|FAIL` line per criterion and
//! exits nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use adagraph::design::{
    dinkelbach_min_msd, lambda_min_subgradient, msd_gradient, sca_min_msd, DesignSpec, ScaOptions,
};
use adagraph::distributed::{CommGraph, DrlsConfig, DrlsNetwork};
use adagraph::experiment::{compare_sampling, run_experiment, Algorithm, ExperimentConfig, Setup, Strategy};
use adagraph::filters::{lms_msd_theory, RlsFilter};
use adagraph::sampling::{draw_sampling_set, localization_norm, observe, reconstructability_lambda};
use adagraph::spectral::{eigendecompose, Bandlimit};
use adagraph::{to_db, Graph, Matrix, NoiseModel, SamplingProbabilities, Vector};
use common::{batch_rls, dense_gram, dense_lambda_min, finite_difference, lowest_band, relative_error, rgg};
use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// n = 20 random geometric graph, |F| = 5, used by AC-1, AC-2, AC-3 and AC-6.
const BASE20: &str = r#"
seed = 1
trials = 200
horizon = 2000

[graph]
kind = "random_geometric"
nodes = 20
radius = 0.4

[band]
bandwidth = 5

[noise]
variance = 0.01

[lms]
step = 0.1

[rls]
forgetting = 0.95
delta = 1e-3
"#;

/// n = 30 random geometric graph, |F| = 8, used by AC-4 and AC-5.
const BASE30: &str = r#"
seed = 3
trials = 1
horizon = 10

[graph]
kind = "random_geometric"
nodes = 30
radius = 0.35

[band]
bandwidth = 8

[noise]
variance = 0.01

[lms]
step = 0.1
"#;

type Outcome = Result<String, String>;

fn config(base: &str, extra: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!("{base}\n{extra}")).expect("acceptance config")
}

/// Per-node variances drawn i.i.d. uniform on `[lo, hi)` from a fixed seed.
fn iid_variances(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

fn within_db(empirical: f64, theory: f64, tol: f64) -> bool {
    (to_db(empirical) - to_db(theory)).abs() <= tol
}

fn ac1() -> Outcome {
    let cfg = config(BASE20, "");
    let run = run_experiment(&cfg, Algorithm::Lms).map_err(|e| e.to_string())?;
    let empirical = run.curve.steady_state();
    let theory = run.curve.theory_msd.ok_or("no theory value")?;
    let footnote = 0.5 * 0.1 * 5.0 * 0.01;
    let detail = format!(
        "steady state {:.2} dB, theory {:.2} dB, (mu/2)|F|sigma^2 = {:.2} dB",
        to_db(empirical),
        to_db(theory),
        to_db(footnote)
    );
    if within_db(empirical, theory, 1.0) && (theory - footnote).abs() <= 1e-9 * footnote {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac2() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for gamma in [-20.0, -23.0, -26.0] {
        let cfg = config(BASE20, &format!("[sampling]\nkind = \"design\"\nsolver = \"rls\"\nmsd_target_db = {gamma}\n"));
        let run = run_experiment(&cfg, Algorithm::Rls).map_err(|e| e.to_string())?;
        let empirical = run.curve.steady_state();
        let theory = run.curve.theory_msd.ok_or("no theory value")?;
        ok &= within_db(empirical, theory, 1.0);
        parts.push(format!(
            "gamma {gamma}: {:.2} vs {:.2} dB (1'p {:.2})",
            to_db(empirical),
            to_db(theory),
            run.probs.expected_count()
        ));
    }
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac3() -> Outcome {
    let gamma = -22.0;
    let mut parts = Vec::new();
    let mut ok = true;
    for alpha in [0.99, 0.98, 0.95] {
        let mut cfg = config(
            BASE20,
            &format!(
                "[sampling]\nkind = \"design\"\nsolver = \"min_rate_convex\"\nrate_target = {alpha}\nmsd_target_db = {gamma}\n"
            ),
        );
        cfg.noise.variance = None;
        cfg.noise.variances = Some(iid_variances(20, 0.002, 0.05, 33));
        let run = run_experiment(&cfg, Algorithm::Lms).map_err(|e| e.to_string())?;
        let rate = run.curve.fit_rate();
        let steady = to_db(run.curve.steady_state());
        ok &= rate <= alpha + 0.01 && steady <= gamma + 1.0;
        parts.push(format!("alpha {alpha}: rate {rate:.4}, MSD {steady:.2} dB"));
    }
    let detail = format!("gamma {gamma} dB; {}", parts.join("; "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn base30_spec() -> Result<(Setup, DesignSpec), String> {
    let mut cfg = config(BASE30, "");
    cfg.noise.variance = None;
    cfg.noise.variances = Some(iid_variances(30, 0.005, 0.02, 30));
    let setup = Setup::build(&cfg).map_err(|e| e.to_string())?;
    let spec = setup.design_spec(&cfg);
    Ok((setup, spec))
}

/// `(μ/2) tr(G(p)) / λ_min(H(p))` from dense oracles.
fn bound_oracle(spec: &DesignSpec, p: &[f64]) -> f64 {
    let weighted: Vec<f64> = p.iter().zip(spec.noise.variances()).map(|(a, b)| a * b).collect();
    0.5 * spec.step * dense_gram(&spec.band, &weighted).trace() / dense_lambda_min(&dense_gram(&spec.band, p))
}

fn ac4() -> Outcome {
    let (_, mut spec) = base30_spec()?;
    spec.rate_target = 0.98;
    spec.budget = 10.0;
    let dink = dinkelbach_min_msd(&spec).map_err(|e| e.to_string())?;
    let sca = sca_min_msd(&spec, &ScaOptions::default()).map_err(|e| e.to_string())?;
    let msd = |p: &[f64]| lms_msd_theory(p, spec.step, &spec.noise, &spec.band).unwrap();
    let md = msd(dink.probs.probs());
    let ms = msd(sca.probs.probs());
    let gap = (md - ms).abs() / md.min(ms);

    let dink_bound = bound_oracle(&spec, dink.probs.probs());
    let lambda_req = spec.required_lambda();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (mut feasible, mut beaten) = (0usize, 0usize);
    while feasible < 10_000 {
        let mut p: Vec<f64> = (0..30).map(|_| rng.random::<f64>()).collect();
        let total: f64 = p.iter().sum();
        if total > spec.budget {
            p.iter_mut().for_each(|x| *x *= spec.budget / total);
        }
        if dense_lambda_min(&dense_gram(&spec.band, &p)) < lambda_req {
            continue;
        }
        feasible += 1;
        beaten += usize::from(dink_bound <= bound_oracle(&spec, &p) * (1.0 + 1e-9));
    }
    let detail = format!(
        "dinkelbach MSD {md:.4e}, SCA MSD {ms:.4e}, relative gap {:.2}% (limit 5%); dinkelbach bound beats {beaten}/{feasible} random feasible points",
        100.0 * gap
    );
    if gap <= 0.05 && beaten == feasible {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac5() -> Outcome {
    let (setup, spec) = base30_spec()?;
    let full_bound = bound_oracle(&spec, &vec![1.0; 30]);
    let gamma = to_db(full_bound) + 1.0;
    let mut cfg = config(BASE30, &format!("[compare]\nalphas = [0.95, 0.96, 0.97, 0.98, 0.99]\nmsd_target_db = {gamma}\n"));
    cfg.noise.variance = None;
    cfg.noise.variances = Some(iid_variances(30, 0.005, 0.02, 30));
    let rows = compare_sampling(&setup, &cfg).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for alpha in &cfg.compare.alphas {
        let at: Vec<_> = rows.iter().filter(|r| r.alpha == *alpha).collect();
        let rate = |s: Strategy| at.iter().find(|r| r.strategy == s).map_or(f64::NAN, |r| r.sampling_rate_mean);
        let designed = rate(Strategy::Designed);
        let baselines = [Strategy::MaxDet, Strategy::Leverage, Strategy::UniformRandom].map(rate);
        // NaN baselines never meet the constraints and compare false here
        ok &= baselines.iter().all(|b| designed <= *b);
        parts.push(format!(
            "{alpha}: {designed:.2} vs {:.0}/{:.0}/{:.1}",
            baselines[0], baselines[1], baselines[2]
        ));
    }
    let detail = format!("gamma {gamma:.2} dB; designed vs max_det/leverage/uniform: {}", parts.join(", "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac6() -> Outcome {
    // first half: complete graph on 5 nodes, K = 50
    let band = lowest_band(&rgg(5, 0.6, 12), 2);
    let comm = CommGraph::from_graph(&Graph::complete(5).unwrap()).unwrap();
    let noise = NoiseModel::white(5, 0.1).unwrap();
    let probs = SamplingProbabilities::unbounded(vec![0.7; 5]).unwrap();
    let drls = DrlsConfig { inner_iters: 50, rho: 10.0, ..Default::default() };
    let mut network = DrlsNetwork::new(comm, 2, drls.clone()).map_err(|e| e.to_string())?;
    let mut central = RlsFilter::new(&band, drls.forgetting, drls.delta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let x = band.synthesize(&Vector::from_fn(2, |_, _| rng.random_range(-1.0..1.0))).unwrap();
    // gap over all instants, and over the final quarter (same window as the steady state)
    let (mut worst, mut worst_late): (f64, f64) = (0.0, 0.0);
    for t in 0..200 {
        let draw = draw_sampling_set(&probs, &mut rng);
        let y = observe(&x, &draw, &noise, &mut rng);
        network.round(&y, draw.mask(), &noise, &band).map_err(|e| e.to_string())?;
        central.step(&y, &draw, &noise, &band).unwrap();
        let reference = central.coefficients().unwrap();
        for s in network.estimates() {
            let gap = (s - &reference).amax();
            worst = worst.max(gap);
            if t >= 150 {
                worst_late = worst_late.max(gap);
            }
        }
    }

    // second half: K = 1 and K = 3 against centralized RLS on the n = 20 instance
    let sampling = "[sampling]\nkind = \"design\"\nsolver = \"rls\"\nmsd_target_db = -20.0\n";
    let steady = |algorithm: Algorithm, inner: usize| -> Result<f64, String> {
        let cfg = config(BASE20, &format!("[drls]\ninner_iters = {inner}\n{sampling}"));
        Ok(to_db(run_experiment(&cfg, algorithm).map_err(|e| e.to_string())?.curve.steady_state()))
    };
    let centralized = steady(Algorithm::Rls, 1)?;
    let k1 = steady(Algorithm::Drls, 1)?;
    let k3 = steady(Algorithm::Drls, 3)?;
    let (gap1, gap3) = ((k1 - centralized).abs(), (k3 - centralized).abs());
    let detail = format!(
        "max coordinate gap {worst_late:.2e} over instants 150..200 (limit 1e-4, {worst:.2e} including the cold start); steady state RLS {centralized:.2} dB, K=1 {k1:.2} dB, K=3 {k3:.2} dB"
    );
    if worst_late <= 1e-4 && gap3 < gap1 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..1usize << n).map(move |mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
}

fn ac7() -> Outcome {
    let mut failures = Vec::new();

    // projector idempotence and orthonormality
    for seed in 0..20 {
        let n = 5 + seed as usize % 10;
        let band = lowest_band(&rgg(n, 0.6, seed), 1 + seed as usize % n);
        let b = band.projector();
        let k = band.bandwidth();
        if (&b * &b - &b).amax() > 1e-10
            || (band.basis().transpose() * band.basis() - Matrix::identity(k, k)).amax() > 1e-10
        {
            failures.push(format!("projector seed {seed}"));
        }
    }

    // reconstructability equivalence, exhaustive for n <= 6
    let mut cases = 0;
    for n in 3..=6 {
        for graph in [Graph::path(n).unwrap(), Graph::cycle(n).unwrap(), rgg(n, 0.8, n as u64)] {
            let basis = eigendecompose(&graph.laplacian()).unwrap();
            for freq in subsets(n).skip(1) {
                let band = Bandlimit::new(&basis, freq).unwrap();
                for set in subsets(n) {
                    let p: Vec<f64> = (0..n).map(|i| f64::from(u8::from(set.contains(&i)))).collect();
                    let positive = reconstructability_lambda(&p, &band) > 1e-10;
                    let below = localization_norm(&set, &band) < 1.0 - 1e-10;
                    if positive != below {
                        failures.push(format!("equivalence n {n} set {set:?}"));
                    }
                    cases += 1;
                }
            }
        }
    }

    // gradients against central differences at 100 points each
    let band = lowest_band(&rgg(10, 0.5, 3), 3);
    let noise = NoiseModel::new(iid_variances(10, 0.005, 0.05, 3)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst_msd, mut worst_lambda): (f64, f64) = (0.0, 0.0);
    let mut lambda_points = 0;
    for _ in 0..100 {
        let p: Vec<f64> = (0..10).map(|_| rng.random_range(0.2..1.0)).collect();
        let analytic = msd_gradient(&p, 0.05, &noise, &band).unwrap();
        let numeric = finite_difference(|q| lms_msd_theory(q, 0.05, &noise, &band).unwrap(), &p, 1e-5);
        worst_msd = worst_msd.max(relative_error(&analytic, &numeric));
    }
    while lambda_points < 100 {
        let p: Vec<f64> = (0..10).map(|_| rng.random_range(0.2..1.0)).collect();
        let mut eig = SymmetricEigen::new(dense_gram(&band, &p)).eigenvalues.as_slice().to_vec();
        eig.sort_by(f64::total_cmp);
        if eig[1] - eig[0] < 1e-2 {
            continue;
        }
        let analytic = lambda_min_subgradient(&p, &band);
        let numeric = finite_difference(|q| dense_lambda_min(&dense_gram(&band, q)), &p, 1e-5);
        worst_lambda = worst_lambda.max(relative_error(&analytic, &numeric));
        lambda_points += 1;
    }
    if worst_msd > 1e-5 || worst_lambda > 1e-5 {
        failures.push(format!("gradients {worst_msd:.1e} / {worst_lambda:.1e}"));
    }

    // Dinkelbach ratio never increases
    let mut spec = DesignSpec::new(lowest_band(&rgg(15, 0.5, 6), 4), NoiseModel::new(iid_variances(15, 0.001, 0.1, 6)).unwrap());
    spec.rate_target = 0.98;
    spec.budget = 8.0;
    let design = dinkelbach_min_msd(&spec).map_err(|e| e.to_string())?;
    if design.trace.entries.windows(2).any(|w| w[1].objective > w[0].objective + 1e-12) {
        failures.push("dinkelbach monotonicity".into());
    }

    // batch against recursive RLS, and the partition of the accumulators
    let band = lowest_band(&rgg(12, 0.5, 31), 4);
    let noise = NoiseModel::new(iid_variances(12, 0.005, 0.1, 8)).unwrap();
    let probs = SamplingProbabilities::unbounded(iid_variances(12, 0.2, 0.9, 9)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = band.synthesize(&Vector::from_fn(4, |_, _| rng.random_range(-1.0..1.0))).unwrap();
    let mut filter = RlsFilter::new(&band, 0.9, 1e-3).unwrap();
    let comm = CommGraph::from_graph(&Graph::cycle(12).unwrap()).unwrap();
    let drls = DrlsConfig { forgetting: 0.9, ..Default::default() };
    let mut network = DrlsNetwork::new(comm, 4, drls).unwrap();
    let mut history = Vec::new();
    let (mut worst_batch, mut worst_partition): (f64, f64) = (0.0, 0.0);
    for _ in 0..60 {
        let draw = draw_sampling_set(&probs, &mut rng);
        let y = observe(&x, &draw, &noise, &mut rng);
        filter.step(&y, &draw, &noise, &band).unwrap();
        network.round(&y, draw.mask(), &noise, &band).unwrap();
        history.push((y, draw));
        let batch = batch_rls(&history, &band, &noise, 0.9, 1e-3);
        worst_batch = worst_batch.max(relative_error(&filter.coefficients().unwrap(), &batch));
        let (m, v) = network.aggregate();
        worst_partition = worst_partition
            .max((m - filter.normal_matrix()).amax())
            .max((v - filter.normal_vector()).amax());
    }
    if worst_batch > 1e-8 {
        failures.push(format!("batch RLS {worst_batch:.1e}"));
    }
    if worst_partition > 1e-10 {
        failures.push(format!("partition {worst_partition:.1e}"));
    }

    let detail = format!(
        "{cases} exhaustive cases; gradient errors {worst_msd:.1e}/{worst_lambda:.1e}; batch RLS {worst_batch:.1e}; partition {worst_partition:.1e}"
    );
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; failed: {}", failures.join(", ")))
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] =
        [("AC-1", ac1), ("AC-2", ac2), ("AC-3", ac3), ("AC-4", ac4), ("AC-5", ac5), ("AC-6", ac6), ("AC-7", ac7)];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{name} PASS: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("{name} FAIL: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("{} of 7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
