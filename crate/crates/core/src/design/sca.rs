use crate::filters::{noise_gram, sampling_gram, FilterError};
use crate::linalg;
use crate::{Matrix, Vector};

use super::barrier::{BarrierError, BarrierOptions, BarrierProblem, SmoothFn};
use super::dinkelbach::{reduced_gram, BudgetSet};
use super::{
    check_rate_feasible, msd_gradient, solve_min_rate_convex, to_probabilities, Design, DesignError, DesignSpec,
    Reduced, SolverTrace, TraceEntry,
};

/// Parameters of the successive convex approximation loops.
///
/// The convex-combination step follows `γ[k] = γ[k−1](1 − η γ[k−1])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaOptions {
    /// Proximal weight `τ`.
    pub proximal: f64,
    /// `γ[0]`.
    pub initial_step: f64,
    /// `η`.
    pub step_decay: f64,
    pub max_iterations: usize,
    /// Stop once `‖p[k+1] − p[k]‖∞` falls below this.
    pub tolerance: f64,
}

impl Default for ScaOptions {
    fn default() -> Self {
        Self { proximal: 1e-6, initial_step: 1.0, step_decay: 1e-3, max_iterations: 500, tolerance: 1e-7 }
    }
}

impl ScaOptions {
    fn next_step(&self, step: f64) -> f64 {
        step * (1.0 - self.step_decay * step)
    }
}

/// `x ↦ tr(J(x)⁻¹ W)` with `J(x) = Σ x_i r_i r_iᵀ`, convex on `J ≻ 0`.
pub(crate) struct TraceInverse {
    pub rows: Matrix,
    pub weight: Matrix,
}

impl SmoothFn for TraceInverse {
    fn value(&self, x: &Vector) -> Option<f64> {
        let chol = linalg::cholesky(&linalg::weighted_gram(&self.rows, x.as_slice()))?;
        Some(chol.solve(&self.weight).trace())
    }

    fn derivatives(&self, x: &Vector) -> Option<(f64, Vector, Matrix)> {
        let chol = linalg::cholesky(&linalg::weighted_gram(&self.rows, x.as_slice()))?;
        let value = chol.solve(&self.weight).trace();
        // columns J⁻¹ r_i
        let solved = chol.solve(&self.rows.transpose());
        let plain = &self.rows * &solved;
        let weighted = solved.transpose() * &self.weight * &solved;
        let grad = -weighted.diagonal();
        let hess = plain.component_mul(&weighted) * 2.0;
        Some((value, grad, hess))
    }
}

/// `cᵀx + (τ/2)‖x − z‖² + tr(J(x)⁻¹ W)`.
struct Surrogate {
    linear: Vector,
    proximal: f64,
    center: Vector,
    trace: TraceInverse,
}

impl SmoothFn for Surrogate {
    fn value(&self, x: &Vector) -> Option<f64> {
        Some(self.linear.dot(x) + 0.5 * self.proximal * (x - &self.center).norm_squared() + self.trace.value(x)?)
    }

    fn derivatives(&self, x: &Vector) -> Option<(f64, Vector, Matrix)> {
        let (tv, tg, th) = self.trace.derivatives(x)?;
        let d = x - &self.center;
        let m = x.len();
        Some((
            self.linear.dot(x) + 0.5 * self.proximal * d.norm_squared() + tv,
            &self.linear + d * self.proximal + tg,
            th + Matrix::identity(m, m) * self.proximal,
        ))
    }
}

/// Surrogate of the LMS MSD around `center`:
///
/// `(τ/2)‖p − z‖² + (μ/2) tr(H(z)⁻¹ G(p)) + (μ/2) tr(H(p)⁻¹ G(z))`.
///
/// At `p = z` its value is twice the MSD and its gradient equals the MSD
/// gradient.
pub fn sca_surrogate(p: &[f64], center: &[f64], spec: &DesignSpec, proximal: f64) -> Result<f64, FilterError> {
    let hz = sampling_gram(center, &spec.band);
    let hp = sampling_gram(p, &spec.band);
    let gz = noise_gram(center, &spec.noise, &spec.band);
    let gp = noise_gram(p, &spec.noise, &spec.band);
    let solve = |h: &Matrix, rhs: &Matrix| {
        let lambda_min = linalg::lambda_min(h);
        linalg::cholesky(h)
            .filter(|_| lambda_min > 1e-12)
            .map(|c| c.solve(rhs).trace())
            .ok_or(FilterError::NotReconstructable { lambda_min })
    };
    let prox: f64 = p.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(0.5 * proximal * prox + 0.5 * spec.step * (solve(&hz, &gp)? + solve(&hp, &gz)?))
}

/// Gradient of [`sca_surrogate`] with respect to `p`.
pub fn sca_surrogate_gradient(
    p: &[f64],
    center: &[f64],
    spec: &DesignSpec,
    proximal: f64,
) -> Result<Vector, FilterError> {
    let n = spec.node_count();
    let all = Reduced::new(&DesignSpec { bounds: vec![1.0; n], ..spec.clone() });
    let objective = surrogate_objective(&all, spec, &Vector::from_column_slice(center), proximal)?;
    objective
        .derivatives(&Vector::from_column_slice(p))
        .map(|(_, g, _)| g)
        .ok_or(FilterError::NotReconstructable { lambda_min: linalg::lambda_min(&sampling_gram(p, &spec.band)) })
}

fn surrogate_objective(reduced: &Reduced, spec: &DesignSpec, center: &Vector, proximal: f64) -> Result<Surrogate, FilterError> {
    let hk = reduced_gram(reduced, center);
    let lambda_min = linalg::lambda_min(&hk);
    let chol = linalg::cholesky(&hk).filter(|_| lambda_min > 1e-12).ok_or(FilterError::NotReconstructable { lambda_min })?;
    let m = reduced.dim();
    let half = 0.5 * spec.step;
    let linear = Vector::from_iterator(
        m,
        (0..m).map(|j| {
            let u = reduced.row(j);
            half * reduced.variances[j] * u.dot(&chol.solve(&u))
        }),
    );
    let weights: Vec<f64> = center.iter().zip(&reduced.variances).map(|(x, s)| x * s).collect();
    let gk = linalg::weighted_gram(&reduced.rows, &weights) * half;
    Ok(Surrogate { linear, proximal, center: center.clone(), trace: TraceInverse { rows: reduced.rows.clone(), weight: gk } })
}

/// Minimises the exact LMS MSD over the rate, budget and box constraints by
/// successive convex approximation.
///
/// Every step minimises [`sca_surrogate`] around the current point and moves
/// a fraction `γ[k]` towards the minimiser. Trace objectives are exact MSDs.
pub fn sca_min_msd(spec: &DesignSpec, options: &ScaOptions) -> Result<Design, DesignError> {
    spec.validate()?;
    check_rate_feasible(spec)?;
    let reduced = Reduced::new(spec);
    let set = BudgetSet::new(spec, &reduced);
    let mut x = set.initial_point(spec)?;
    let barrier_options = BarrierOptions::default();

    let record = |x: &Vector, entries: &mut Vec<TraceEntry>| {
        let p = reduced.expand(x);
        let msd = spec.lms_msd(&p);
        entries.push(TraceEntry { objective: msd, msd, violation: set.violation(spec, &p), probs: p });
    };
    let mut entries = Vec::new();
    record(&x, &mut entries);

    let mut step = options.initial_step;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        step = options.next_step(step);
        let objective = surrogate_objective(&reduced, spec, &x, options.proximal)?;
        let problem = set.problem(&objective);
        let target = problem.solve(Some(&x), &barrier_options, |_| {})?.x;
        let next = &x + (&target - &x) * step;
        iterations += 1;
        let change = (&next - &x).amax();
        x = next;
        record(&x, &mut entries);
        if change < options.tolerance {
            converged = true;
            break;
        }
    }
    let p = reduced.expand(&x);
    Ok(Design { probs: to_probabilities(spec, p)?, trace: SolverTrace { entries, converged, iterations } })
}

/// `MSD(z) + ∇MSD(z)ᵀ(x − z) + (L/2)‖x − z‖² − γ`.
struct QuadraticMajorant {
    center: Vector,
    gradient: Vector,
    curvature: f64,
    offset: f64,
}

impl QuadraticMajorant {
    fn model(&self, x: &Vector) -> f64 {
        let d = x - &self.center;
        self.offset + self.gradient.dot(&d) + 0.5 * self.curvature * d.norm_squared()
    }
}

impl SmoothFn for QuadraticMajorant {
    fn value(&self, x: &Vector) -> Option<f64> {
        Some(self.model(x))
    }

    fn derivatives(&self, x: &Vector) -> Option<(f64, Vector, Matrix)> {
        let d = x - &self.center;
        let m = x.len();
        Some((self.model(x), &self.gradient + d * self.curvature, Matrix::identity(m, m) * self.curvature))
    }
}

/// `1ᵀx + (τ/2)‖x − z‖²`.
struct ProximalRate {
    proximal: f64,
    center: Vector,
}

impl SmoothFn for ProximalRate {
    fn value(&self, x: &Vector) -> Option<f64> {
        Some(x.sum() + 0.5 * self.proximal * (x - &self.center).norm_squared())
    }

    fn derivatives(&self, x: &Vector) -> Option<(f64, Vector, Matrix)> {
        let d = x - &self.center;
        let m = x.len();
        Some((
            x.sum() + 0.5 * self.proximal * d.norm_squared(),
            Vector::from_element(m, 1.0) + d * self.proximal,
            Matrix::identity(m, m) * self.proximal,
        ))
    }
}

const INITIAL_CURVATURE: f64 = 1e-6;
const MAX_CURVATURE_DOUBLINGS: usize = 200;

/// Minimises the total sampling rate under the rate target and the exact
/// LMS MSD target by successive convex approximation.
///
/// Starts from [`solve_min_rate_convex`], whose solutions already satisfy
/// the exact MSD target. The MSD constraint is replaced by a quadratic
/// majorant whose curvature `L` is doubled until it bounds the MSD at both
/// the inner minimiser and the new iterate, which keeps every iterate
/// feasible.
pub fn sca_min_rate(spec: &DesignSpec, options: &ScaOptions) -> Result<Design, DesignError> {
    let convex = solve_min_rate_convex(spec)?;
    let reduced = Reduced::new(spec);
    let required = spec.required_lambda();
    let mut x = reduced.restrict(convex.probs.probs());
    let barrier_options = BarrierOptions::default();
    let msd_at = |x: &Vector| spec.lms_msd(&reduced.expand(x));
    let violation = |p: &[f64]| (required - spec.lambda_min(p)).max(spec.lms_msd(p) - spec.msd_target).max(0.0);

    let record = |x: &Vector, entries: &mut Vec<TraceEntry>| {
        let p = reduced.expand(x);
        entries.push(TraceEntry { objective: p.iter().sum(), msd: spec.lms_msd(&p), violation: violation(&p), probs: p });
    };
    let mut entries = Vec::new();
    record(&x, &mut entries);

    let mut curvature = INITIAL_CURVATURE;
    let mut step = options.initial_step;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        step = options.next_step(step);
        let msd = msd_at(&x);
        let full_gradient = msd_gradient(&reduced.expand(&x), spec.step, &spec.noise, &spec.band)?;
        let gradient = Vector::from_iterator(reduced.dim(), reduced.nodes.iter().map(|&i| full_gradient[i]));
        let objective = ProximalRate { proximal: options.proximal, center: x.clone() };

        let mut doublings = 0;
        let next = loop {
            let majorant = QuadraticMajorant { center: x.clone(), gradient: gradient.clone(), curvature, offset: msd - spec.msd_target };
            let mut problem = BarrierProblem {
                lower: reduced.lower(),
                upper: reduced.upper.clone(),
                objective: &objective,
                lmis: vec![reduced.lambda_lmi(required)],
                constraints: vec![],
            };
            if spec.msd_target.is_finite() {
                problem.constraints.push(&majorant);
            }
            let target = match problem.solve(Some(&x), &barrier_options, |_| {}) {
                Ok(solution) => solution.x,
                // only the current point is feasible for the surrogate set
                Err(BarrierError::Infeasible { .. }) => x.clone(),
                Err(err) => return Err(err.into()),
            };
            let next = &x + (&target - &x) * step;
            let slack = 1e-12 * spec.msd_target.min(1.0);
            let majorizes = |y: &Vector| msd_at(y) - spec.msd_target <= majorant.model(y) + slack;
            if !spec.msd_target.is_finite() || (majorizes(&target) && majorizes(&next)) {
                break next;
            }
            doublings += 1;
            if doublings > MAX_CURVATURE_DOUBLINGS {
                return Err(DesignError::Numerical("curvature search for the MSD majorant did not terminate".into()));
            }
            curvature *= 2.0;
        };
        iterations += 1;
        let change = (&next - &x).amax();
        x = next;
        record(&x, &mut entries);
        if change < options.tolerance {
            converged = true;
            break;
        }
    }
    let p = reduced.expand(&x);
    Ok(Design { probs: to_probabilities(spec, p)?, trace: SolverTrace { entries, converged, iterations } })
}
