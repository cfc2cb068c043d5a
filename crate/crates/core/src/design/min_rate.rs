use crate::{Matrix, Vector};

use super::barrier::{Affine, BarrierOptions, BarrierProblem, Lmi};
use super::{
    check_rate_feasible, dinkelbach_min_msd, to_probabilities, Design, DesignError, DesignSpec, Reduced, SolverTrace,
    TraceEntry,
};

/// Minimum total sampling rate subject to the rate target and the
/// trace/λ_min upper bound on the LMS MSD.
///
/// The bound constraint `(μ/2) tr(G(p)) / λ_min(H(p)) ≤ γ` is the linear
/// matrix inequality `H(p) − (μ/(2γ)) tr(G(p)) I ⪰ 0`, so the problem is a
/// small semidefinite program. Its solutions also meet the exact MSD target
/// because the bound dominates the exact MSD.
pub fn solve_min_rate_convex(spec: &DesignSpec) -> Result<Design, DesignError> {
    spec.validate()?;
    check_rate_feasible(spec)?;
    let reduced = Reduced::new(spec);
    let m = reduced.dim();
    let k = reduced.bandwidth();
    let required = spec.required_lambda();

    let mut lmis = vec![reduced.lambda_lmi(required)];
    let ratio = 0.5 * spec.step / spec.msd_target;
    if ratio > 0.0 {
        let coefficients = (0..m)
            .map(|j| {
                let energy = reduced.row(j).norm_squared();
                reduced.outer(j) - Matrix::identity(k, k) * (ratio * reduced.variances[j] * energy)
            })
            .collect();
        lmis.push(Lmi { constant: Matrix::zeros(k, k), coefficients });
    }
    let objective = Affine { slope: Vector::from_element(m, 1.0), offset: 0.0 };
    let problem =
        BarrierProblem { lower: reduced.lower(), upper: reduced.upper.clone(), objective: &objective, lmis, constraints: vec![] };

    let options = BarrierOptions::default();
    let start = match problem.find_interior(&options) {
        Ok(x) => x,
        Err(_) => return Err(msd_infeasible(spec)),
    };
    let mut entries = vec![entry(spec, &reduced.expand(&start))];
    let solution = problem.solve_from(&start, &options, |x| entries.push(entry(spec, &reduced.expand(x))))?;
    let p = reduced.expand(&solution.x);
    let trace = SolverTrace { entries, converged: solution.gap <= options.gap_tol * solution.objective.abs().max(1.0), iterations: solution.outer_steps };
    Ok(Design { probs: to_probabilities(spec, p)?, trace })
}

fn entry(spec: &DesignSpec, p: &[f64]) -> TraceEntry {
    let violation = (spec.required_lambda() - spec.lambda_min(p)).max(spec.lms_msd_bound(p) - spec.msd_target).max(0.0);
    TraceEntry { probs: p.to_vec(), objective: p.iter().sum(), msd: spec.lms_msd(p), violation }
}

/// Reports the smallest MSD bound reachable under the rate target.
fn msd_infeasible(spec: &DesignSpec) -> DesignError {
    let mut relaxed = spec.clone();
    relaxed.budget = spec.bounds.iter().sum();
    let achievable = dinkelbach_min_msd(&relaxed)
        .map(|d| spec.lms_msd_bound(d.probs.probs()))
        .unwrap_or(f64::NAN);
    DesignError::MsdInfeasible { target: spec.msd_target, achievable }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{connected_random_geometric_graph, Graph};
    use crate::sampling::NoiseModel;
    use crate::spectral::eigendecompose;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spec(n: usize, k: usize, seed: u64) -> DesignSpec {
        let g = connected_random_geometric_graph(n, 0.6, seed, 100).unwrap();
        let band = eigendecompose(&g.laplacian()).unwrap().lowest(k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = NoiseModel::new((0..n).map(|_| rng.random_range(0.005..0.05)).collect()).unwrap();
        DesignSpec::new(band, noise)
    }

    #[test]
    fn vacuous_constraints_give_tiny_rate() {
        let mut spec = random_spec(10, 3, 1);
        spec.rate_target = 1.0 - 1e-9;
        spec.msd_target = 1e9;
        let design = solve_min_rate_convex(&spec).unwrap();
        assert!(design.sampling_rate() < 1e-6, "{}", design.sampling_rate());
    }

    #[test]
    fn constant_band_reduces_to_a_threshold() {
        // F = {0}: H = Σp/n and the bound is the constant (μ/2)σ², so only the
        // rate constraint binds: Σp = n(1 − ᾱ)/(2μ)
        let n = 6;
        let g = Graph::cycle(n).unwrap();
        let band = eigendecompose(&g.laplacian()).unwrap().lowest(1).unwrap();
        let mut spec = DesignSpec::new(band, NoiseModel::white(n, 0.01).unwrap());
        spec.step = 0.1;
        spec.rate_target = 0.97;
        spec.msd_target = 0.5 * 0.1 * 0.01 * 1.0 * 1.01;
        let design = solve_min_rate_convex(&spec).unwrap();
        assert_abs_diff_eq!(design.sampling_rate(), n as f64 * spec.required_lambda(), epsilon = 1e-4);
    }

    #[test]
    fn rate_infeasibility_reports_best_eigenvalue() {
        let mut spec = random_spec(10, 3, 2);
        spec.rate_target = 0.5;
        spec.bounds = vec![0.5; 10];
        spec.budget = 5.0;
        match solve_min_rate_convex(&spec) {
            Err(DesignError::RateInfeasible { required, achievable }) => {
                assert_abs_diff_eq!(required, 2.5, epsilon = 1e-12);
                assert_abs_diff_eq!(achievable, 0.5, epsilon = 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn msd_infeasibility_is_reported() {
        let mut spec = random_spec(10, 3, 3);
        spec.msd_target = 1e-6;
        assert!(matches!(solve_min_rate_convex(&spec), Err(DesignError::MsdInfeasible { .. })));
    }

    #[test]
    fn beats_random_feasible_points() {
        let mut spec = random_spec(10, 3, 4);
        spec.rate_target = 0.98;
        spec.msd_target = 2.0 * spec.lms_msd_bound(&[1.0; 10]);
        let design = solve_min_rate_convex(&spec).unwrap();
        let p = design.probs.probs();
        let last = design.trace.entries.last().unwrap();
        assert!(last.violation <= 1e-6);
        assert!(spec.lms_msd(p) <= spec.msd_target);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut feasible = 0;
        for _ in 0..10_000 {
            let q: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
            if spec.lambda_min(&q) >= spec.required_lambda() && spec.lms_msd_bound(&q) <= spec.msd_target {
                feasible += 1;
                assert!(design.sampling_rate() <= q.iter().sum::<f64>() + 1e-9);
            }
        }
        assert!(feasible > 100, "only {feasible} random points were feasible");
    }
}
