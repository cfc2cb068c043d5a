use crate::linalg;
use crate::{Matrix, Vector};

use super::barrier::{Affine, BarrierOptions, BarrierProblem, SmoothFn};
use super::sca::TraceInverse;
use super::{to_probabilities, Design, DesignError, DesignSpec, Reduced, SolverTrace, TraceEntry};

/// `tr(J(x)⁻¹) − Γ` with `J(x) = Σ x_i u_i u_iᵀ / σ_i²`.
struct TraceBudget {
    trace: TraceInverse,
    limit: f64,
}

impl SmoothFn for TraceBudget {
    fn value(&self, x: &Vector) -> Option<f64> {
        Some(self.trace.value(x)? - self.limit)
    }

    fn derivatives(&self, x: &Vector) -> Option<(f64, Vector, Matrix)> {
        let (v, g, h) = self.trace.derivatives(x)?;
        Some((v - self.limit, g, h))
    }
}

/// Minimum total sampling rate for which the RLS steady-state MSD
/// `((1−β)/(1+β)) tr(J(p)⁻¹)` stays below the target.
pub fn solve_rls_design(spec: &DesignSpec) -> Result<Design, DesignError> {
    spec.validate()?;
    let reduced = Reduced::new(spec);
    let m = reduced.dim();
    let k = reduced.bandwidth();
    let factor = (1.0 - spec.forgetting) / (1.0 + spec.forgetting);
    let limit = spec.msd_target / factor;
    let scaled_rows = Matrix::from_fn(m, k, |j, c| reduced.rows[(j, c)] / reduced.variances[j].sqrt());
    let constraint = TraceBudget { trace: TraceInverse { rows: scaled_rows, weight: Matrix::identity(k, k) }, limit };

    let upper = reduced.upper_vector();
    let at_bounds = constraint.trace.value(&upper).unwrap_or(f64::INFINITY);
    if !(at_bounds < limit) {
        return Err(DesignError::MsdInfeasible { target: spec.msd_target, achievable: factor * at_bounds });
    }
    // tr(J(s·p_max)⁻¹) = tr(J(p_max)⁻¹)/s, strictly below the limit for this s
    let scale = 0.5 * (1.0 + at_bounds / limit);
    let start = upper * scale;

    let objective = Affine { slope: Vector::from_element(m, 1.0), offset: 0.0 };
    let problem = BarrierProblem {
        lower: reduced.lower(),
        upper: reduced.upper.clone(),
        objective: &objective,
        lmis: vec![],
        constraints: vec![&constraint],
    };
    let options = BarrierOptions::default();
    let mut entries = Vec::new();
    let mut record = |x: &Vector| {
        let p = reduced.expand(x);
        let msd = factor * constraint.trace.value(x).unwrap_or(f64::INFINITY);
        entries.push(TraceEntry { objective: p.iter().sum(), msd, violation: (msd - spec.msd_target).max(0.0), probs: p });
    };
    record(&start);
    let solution = problem.solve_from(&start, &options, &mut record)?;
    let converged = solution.gap <= options.gap_tol * solution.objective.abs().max(1.0);
    let p = reduced.expand(&solution.x);
    debug_assert!(linalg::lambda_min(&spec.band.weighted_gram(&p)) > 0.0);
    Ok(Design { probs: to_probabilities(spec, p)?, trace: SolverTrace { entries, converged, iterations: solution.outer_steps } })
}
