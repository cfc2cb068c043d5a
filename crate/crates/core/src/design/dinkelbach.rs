use crate::linalg;
use crate::{Matrix, Vector};

use super::barrier::{Affine, BarrierOptions, BarrierProblem, Lmi, SmoothFn};
use super::{check_rate_feasible, to_probabilities, Design, DesignError, DesignSpec, Reduced, SolverTrace, TraceEntry};

const STOP_TOL: f64 = 1e-8;
const MAX_ITERATIONS: usize = 100;

/// Constraint set `C`: rate target, budget and box, on the free nodes.
pub(crate) struct BudgetSet<'a> {
    pub reduced: &'a Reduced,
    pub required: f64,
    pub budget: Affine,
}

impl<'a> BudgetSet<'a> {
    pub fn new(spec: &DesignSpec, reduced: &'a Reduced) -> Self {
        let m = reduced.dim();
        Self {
            reduced,
            required: spec.required_lambda(),
            budget: Affine { slope: Vector::from_element(m, 1.0), offset: -spec.budget },
        }
    }

    pub fn problem<'b>(&'b self, objective: &'b dyn SmoothFn) -> BarrierProblem<'b> {
        BarrierProblem {
            lower: self.reduced.lower(),
            upper: self.reduced.upper.clone(),
            objective,
            lmis: vec![self.reduced.lambda_lmi(self.required)],
            constraints: vec![&self.budget],
        }
    }

    /// `0.5·p_max`, scaled down under the budget when necessary, or a phase-one
    /// point when that is not strictly feasible.
    pub fn initial_point(&self, spec: &DesignSpec) -> Result<Vector, DesignError> {
        let mut x = self.reduced.upper_vector() * 0.5;
        let total = x.sum();
        if total >= spec.budget {
            x *= 0.95 * spec.budget / total;
        }
        let zero = Affine { slope: Vector::zeros(self.reduced.dim()), offset: 0.0 };
        let problem = self.problem(&zero);
        if problem.is_strictly_feasible(&x) {
            return Ok(x);
        }
        problem.find_interior(&BarrierOptions::default()).map_err(|_| {
            DesignError::Infeasible(format!(
                "rate target (smallest eigenvalue {:e}) cannot be met within budget {}",
                self.required, spec.budget
            ))
        })
    }

    pub fn violation(&self, spec: &DesignSpec, p: &[f64]) -> f64 {
        (self.required - spec.lambda_min(p)).max(p.iter().sum::<f64>() - spec.budget).max(0.0)
    }
}

/// Minimises the MSD bound `(μ/2) tr(G(p)) / λ_min(H(p))` over the rate,
/// budget and box constraints with Dinkelbach's method.
///
/// Each iteration solves `min f(p) − ω λ_min(H(p))` with `f = tr(G)`, written
/// through an epigraph variable `s ≤ λ_min(H(p))`, and updates `ω` to the
/// ratio at the new point. The trace objective is the ratio `f/λ_min`, which
/// never increases.
pub fn dinkelbach_min_msd(spec: &DesignSpec) -> Result<Design, DesignError> {
    spec.validate()?;
    check_rate_feasible(spec)?;
    let reduced = Reduced::new(spec);
    let set = BudgetSet::new(spec, &reduced);
    let m = reduced.dim();
    let k = reduced.bandwidth();
    let cost = Vector::from_iterator(m, (0..m).map(|j| reduced.variances[j] * reduced.row(j).norm_squared()));
    let ratio = |x: &Vector| cost.dot(x) / linalg::lambda_min(&reduced_gram(&reduced, x));

    let mut x = set.initial_point(spec)?;
    let mut entries = Vec::new();
    let record = |x: &Vector, entries: &mut Vec<TraceEntry>| {
        let p = reduced.expand(x);
        entries.push(TraceEntry { objective: ratio(x), msd: spec.lms_msd(&p), violation: set.violation(spec, &p), probs: p });
    };
    record(&x, &mut entries);

    let lambda_cap = spec.lambda_min(&spec.bounds) + 1.0;
    let mut lower = reduced.lower();
    lower.push(-1.0);
    let mut upper = reduced.upper.clone();
    upper.push(lambda_cap);
    let mut lambda_coeffs: Vec<Matrix> = (0..m).map(|j| reduced.outer(j)).collect();
    lambda_coeffs.push(Matrix::zeros(k, k));
    let mut epigraph_coeffs: Vec<Matrix> = (0..m).map(|j| reduced.outer(j)).collect();
    epigraph_coeffs.push(-Matrix::identity(k, k));
    let budget = Affine { slope: Vector::from_element(m, 1.0).insert_row(m, 0.0), offset: -spec.budget };
    let options = BarrierOptions::default();

    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let omega = ratio(&x);
        let objective = Affine { slope: cost.clone().insert_row(m, -omega), offset: 0.0 };
        let problem = BarrierProblem {
            lower: lower.clone(),
            upper: upper.clone(),
            objective: &objective,
            lmis: vec![
                Lmi { constant: Matrix::identity(k, k) * -set.required, coefficients: lambda_coeffs.clone() },
                Lmi { constant: Matrix::zeros(k, k), coefficients: epigraph_coeffs.clone() },
            ],
            constraints: vec![&budget],
        };
        let lambda = linalg::lambda_min(&reduced_gram(&reduced, &x));
        let start = x.clone().insert_row(m, lambda - 0.5);
        let solution = problem.solve(Some(&start), &options, |_| {})?;
        iterations += 1;
        let candidate = solution.x.rows(0, m).into_owned();
        let h = cost.dot(&candidate) - omega * linalg::lambda_min(&reduced_gram(&reduced, &candidate));
        if h > 0.0 {
            // the current point already solves the parametric problem
            record(&x, &mut entries);
            converged = true;
            break;
        }
        x = candidate;
        record(&x, &mut entries);
        if h.abs() < STOP_TOL {
            converged = true;
            break;
        }
    }
    let p = reduced.expand(&x);
    Ok(Design { probs: to_probabilities(spec, p)?, trace: SolverTrace { entries, converged, iterations } })
}

pub(crate) fn reduced_gram(reduced: &Reduced, x: &Vector) -> Matrix {
    linalg::weighted_gram(&reduced.rows, x.as_slice())
}
