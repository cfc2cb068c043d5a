mod common;

use adagraph::design::{
    dinkelbach_min_msd, lambda_min_subgradient, msd_gradient, sca_min_msd, sca_min_rate, solve_min_rate_convex,
    solve_rls_design, Design, DesignSpec, ScaOptions,
};
use adagraph::filters::lms_msd_theory;
use adagraph::{from_db, Bandlimit, NoiseModel};
use common::{dense_gram, dense_lambda_min, finite_difference, lowest_band, relative_error, rgg};
use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(n: usize, k: usize, seed: u64) -> (Bandlimit, NoiseModel) {
    let band = lowest_band(&rgg(n, 0.5, seed), k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = NoiseModel::new((0..n).map(|_| rng.random_range(0.005..0.05)).collect()).unwrap();
    (band, noise)
}

#[test]
fn msd_gradient_matches_finite_differences() {
    let (band, noise) = instance(10, 3, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let step = 0.05;
    for _ in 0..100 {
        let p: Vec<f64> = (0..10).map(|_| rng.random_range(0.2..1.0)).collect();
        let analytic = msd_gradient(&p, step, &noise, &band).unwrap();
        let numeric = finite_difference(|q| lms_msd_theory(q, step, &noise, &band).unwrap(), &p, 1e-5);
        let err = relative_error(&analytic, &numeric);
        assert!(err < 1e-5, "relative error {err:e}");
    }
}

#[test]
fn lambda_min_gradient_matches_finite_differences_where_simple() {
    let (band, _) = instance(10, 3, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    while checked < 100 {
        let p: Vec<f64> = (0..10).map(|_| rng.random_range(0.2..1.0)).collect();
        let mut eig = SymmetricEigen::new(dense_gram(&band, &p)).eigenvalues.as_slice().to_vec();
        eig.sort_by(f64::total_cmp);
        if eig[1] - eig[0] < 1e-2 {
            continue;
        }
        let analytic = lambda_min_subgradient(&p, &band);
        let numeric = finite_difference(|q| dense_lambda_min(&dense_gram(&band, q)), &p, 1e-5);
        let err = relative_error(&analytic, &numeric);
        assert!(err < 1e-5, "relative error {err:e}");
        checked += 1;
    }
}

fn lms_spec(n: usize, k: usize, seed: u64) -> DesignSpec {
    let (band, noise) = instance(n, k, seed);
    let mut spec = DesignSpec::new(band, noise);
    spec.step = 0.1;
    spec.rate_target = 0.98;
    spec
}

fn check_rows(name: &str, design: &Design) {
    let trace = &design.trace;
    assert_eq!(trace.entries.len(), trace.iterations + 1, "{name}");
    for entry in &trace.entries {
        assert_eq!(entry.probs.len(), design.probs.len(), "{name}");
    }
}

#[test]
fn every_solver_records_start_plus_one_entry_per_iteration() {
    let mut spec = lms_spec(12, 3, 5);
    let full_msd = lms_msd_theory(&[1.0; 12], spec.step, &spec.noise, &spec.band).unwrap();
    spec.msd_target = 2.0 * full_msd;
    check_rows("min_rate_convex", &solve_min_rate_convex(&spec).unwrap());
    check_rows("sca_min_rate", &sca_min_rate(&spec, &ScaOptions::default()).unwrap());
    spec.msd_target = f64::INFINITY;
    spec.budget = 6.0;
    check_rows("dinkelbach", &dinkelbach_min_msd(&spec).unwrap());
    check_rows("sca_min_msd", &sca_min_msd(&spec, &ScaOptions::default()).unwrap());
    spec.msd_target = from_db(-20.0);
    check_rows("rls", &solve_rls_design(&spec).unwrap());
}

#[test]
fn designs_satisfy_their_constraints_by_dense_oracle() {
    let mut spec = lms_spec(12, 3, 6);
    let full_msd = lms_msd_theory(&[1.0; 12], spec.step, &spec.noise, &spec.band).unwrap();
    spec.msd_target = 2.0 * full_msd;
    let lambda_req = spec.required_lambda();

    let design = solve_min_rate_convex(&spec).unwrap();
    let p = design.probs.probs();
    let lambda = dense_lambda_min(&dense_gram(&spec.band, p));
    assert!(lambda >= lambda_req * (1.0 - 1e-6));
    let weights: Vec<f64> = p.iter().zip(spec.noise.variances()).map(|(pi, s)| pi * s).collect();
    let bound = 0.5 * spec.step * dense_gram(&spec.band, &weights).trace() / lambda;
    assert!(bound <= spec.msd_target * (1.0 + 1e-6));
    assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));

    let design = sca_min_rate(&spec, &ScaOptions::default()).unwrap();
    let p = design.probs.probs();
    assert!(dense_lambda_min(&dense_gram(&spec.band, p)) >= lambda_req * (1.0 - 1e-6));
    assert!(lms_msd_theory(p, spec.step, &spec.noise, &spec.band).unwrap() <= spec.msd_target * (1.0 + 1e-6));

    spec.msd_target = from_db(-20.0);
    let design = solve_rls_design(&spec).unwrap();
    let p = design.probs.probs();
    let weights: Vec<f64> = p.iter().zip(spec.noise.variances()).map(|(pi, s)| pi / s).collect();
    let j = dense_gram(&spec.band, &weights);
    let msd = (1.0 - spec.forgetting) / (1.0 + spec.forgetting) * j.try_inverse().unwrap().trace();
    assert!(msd <= spec.msd_target * (1.0 + 1e-6), "{msd} > {}", spec.msd_target);
}

#[test]
fn budgeted_msd_traces_settle_within_fifty_iterations() {
    for seed in [7, 8] {
        let mut spec = lms_spec(20, 5, seed);
        spec.budget = 8.0;
        for (name, design) in [
            ("dinkelbach", dinkelbach_min_msd(&spec).unwrap()),
            ("sca_min_msd", sca_min_msd(&spec, &ScaOptions::default()).unwrap()),
        ] {
            let trace = &design.trace.entries;
            let last = trace.last().unwrap().msd;
            let settle = trace.iter().position(|e| (e.msd - last).abs() <= 0.05 * last).unwrap();
            assert!(settle <= 50, "{name} seed {seed}: settled at {settle}");
            assert!(design.sampling_rate() <= spec.budget + 1e-6);
        }
    }
}
