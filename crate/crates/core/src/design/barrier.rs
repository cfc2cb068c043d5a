//! Log-barrier interior-point solver for the small convex programs that
//! appear inside the design algorithms.
//!
//! Problems have the form
//!
//! ```text
//! minimise   φ(x)
//! subject to l < x < u                      (every variable is boxed)
//!            F_j(x) = C_j + Σ x_i A_ji ≻ 0  (linear matrix inequalities)
//!            c_k(x) < 0                     (smooth convex scalars)
//! ```
//!
//! and are solved by Newton centering on `t φ(x) − Σ log(...)` for an
//! increasing sequence of `t`.

use thiserror::Error;

use crate::linalg;
use crate::{Matrix, Vector};

/// Smooth convex function with an open domain.
///
/// Evaluation outside the domain returns `None`.
pub(crate) trait SmoothFn {
    fn value(&self, x: &Vector) -> Option<f64>;
    fn derivatives(&self, x: &Vector) -> Option<(f64, Vector, Matrix)>;
}

/// `aᵀx + b`.
pub(crate) struct Affine {
    pub slope: Vector,
    pub offset: f64,
}

impl SmoothFn for Affine {
    fn value(&self, x: &Vector) -> Option<f64> {
        Some(self.slope.dot(x) + self.offset)
    }

    fn derivatives(&self, x: &Vector) -> Option<(f64, Vector, Matrix)> {
        let m = x.len();
        Some((self.slope.dot(x) + self.offset, self.slope.clone(), Matrix::zeros(m, m)))
    }
}

/// Affine matrix function `C + Σ x_i A_i`, kept positive definite.
#[derive(Debug, Clone)]
pub(crate) struct Lmi {
    pub constant: Matrix,
    pub coefficients: Vec<Matrix>,
}

impl Lmi {
    pub fn evaluate(&self, x: &Vector) -> Matrix {
        let mut f = self.constant.clone();
        for (xi, a) in x.iter().zip(&self.coefficients) {
            if *xi != 0.0 {
                f += a * *xi;
            }
        }
        f
    }

    fn size(&self) -> usize {
        self.constant.nrows()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BarrierError {
    #[error("no strictly feasible point exists (best margin {margin:e})")]
    Infeasible { margin: f64 },

    #[error("starting point is not strictly feasible")]
    InfeasibleStart,

    #[error("objective undefined at a strictly feasible point")]
    UndefinedObjective,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BarrierOptions {
    /// Stop once the duality-gap bound `ν/t` drops below this.
    pub gap_tol: f64,
    pub initial_weight: f64,
    pub growth: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub max_outer: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-10, initial_weight: 1.0, growth: 10.0, newton_tol: 1e-11, max_newton: 200, max_outer: 40 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BarrierSolution {
    pub x: Vector,
    pub objective: f64,
    pub outer_steps: usize,
    /// Final bound on suboptimality.
    pub gap: f64,
}

pub(crate) struct BarrierProblem<'a> {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub objective: &'a dyn SmoothFn,
    pub lmis: Vec<Lmi>,
    pub constraints: Vec<&'a dyn SmoothFn>,
}

const ARMIJO: f64 = 0.25;
const SHRINK: f64 = 0.5;
const MIN_STEP: f64 = 1e-16;

impl<'a> BarrierProblem<'a> {
    fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Barrier parameter `ν`.
    fn complexity(&self) -> f64 {
        (2 * self.dim() + self.lmis.iter().map(Lmi::size).sum::<usize>() + self.constraints.len()) as f64
    }

    /// True when `x` lies strictly inside every constraint.
    pub fn is_strictly_feasible(&self, x: &Vector) -> bool {
        self.barrier_value(x).is_some()
    }

    /// `Φ(x)`, or `None` outside the interior.
    fn barrier_value(&self, x: &Vector) -> Option<f64> {
        let mut total = 0.0;
        for i in 0..self.dim() {
            let (a, b) = (x[i] - self.lower[i], self.upper[i] - x[i]);
            if !(a > 0.0 && b > 0.0) {
                return None;
            }
            total -= a.ln() + b.ln();
        }
        for lmi in &self.lmis {
            let chol = linalg::cholesky(&lmi.evaluate(x))?;
            total -= 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        }
        for c in &self.constraints {
            let v = c.value(x)?;
            if !(v < 0.0) {
                return None;
            }
            total -= (-v).ln();
        }
        total.is_finite().then_some(total)
    }

    fn weighted_value(&self, x: &Vector, t: f64) -> Option<f64> {
        let barrier = self.barrier_value(x)?;
        let obj = self.objective.value(x)?;
        Some(t * obj + barrier)
    }

    fn weighted_derivatives(&self, x: &Vector, t: f64) -> Option<(f64, Vector, Matrix)> {
        let m = self.dim();
        let (obj, og, oh) = self.objective.derivatives(x)?;
        let mut value = t * obj;
        let mut grad = og * t;
        let mut hess = oh * t;
        for i in 0..m {
            let (a, b) = (x[i] - self.lower[i], self.upper[i] - x[i]);
            if !(a > 0.0 && b > 0.0) {
                return None;
            }
            value -= a.ln() + b.ln();
            grad[i] += -1.0 / a + 1.0 / b;
            hess[(i, i)] += 1.0 / (a * a) + 1.0 / (b * b);
        }
        for lmi in &self.lmis {
            let f = lmi.evaluate(x);
            let chol = linalg::cholesky(&f)?;
            let l = chol.l();
            value -= 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
            let k = lmi.size();
            let l_inv = l.solve_lower_triangular(&Matrix::identity(k, k))?;
            let scaled: Vec<Matrix> =
                lmi.coefficients.iter().map(|a| &l_inv * a * l_inv.transpose()).collect();
            for i in 0..m {
                grad[i] -= scaled[i].trace();
                for j in 0..=i {
                    let h = scaled[i].dot(&scaled[j]);
                    hess[(i, j)] += h;
                    if i != j {
                        hess[(j, i)] += h;
                    }
                }
            }
        }
        for c in &self.constraints {
            let (v, g, h) = c.derivatives(x)?;
            if !(v < 0.0) {
                return None;
            }
            value -= (-v).ln();
            grad += &g / (-v);
            hess += &g * g.transpose() / (v * v) + h / (-v);
        }
        value.is_finite().then_some((value, grad, hess))
    }

    /// Newton's method on `t φ + Φ` from a strictly feasible `x`.
    fn center(&self, x: &mut Vector, t: f64, options: &BarrierOptions) {
        let mut steps = 0;
        while steps < options.max_newton {
            let Some((value, grad, hess)) = self.weighted_derivatives(x, t) else {
                break;
            };
            let direction = -newton_solve(&hess, &grad);
            let decrement = -grad.dot(&direction);
            if !(decrement.is_finite()) || decrement / 2.0 <= options.newton_tol {
                break;
            }
            let mut step = 1.0;
            let accepted = loop {
                let trial = &*x + &direction * step;
                if let Some(v) = self.weighted_value(&trial, t) {
                    if v <= value - ARMIJO * step * decrement {
                        break Some(trial);
                    }
                }
                step *= SHRINK;
                if step < MIN_STEP {
                    break None;
                }
            };
            steps += 1;
            match accepted {
                Some(trial) => *x = trial,
                None => break,
            }
        }
    }

    /// Runs the barrier method from a strictly feasible point, reporting
    /// every centred iterate to `observe`.
    pub fn solve_from(
        &self,
        start: &Vector,
        options: &BarrierOptions,
        mut observe: impl FnMut(&Vector),
    ) -> Result<BarrierSolution, BarrierError> {
        if !self.is_strictly_feasible(start) {
            return Err(BarrierError::InfeasibleStart);
        }
        if self.objective.value(start).is_none() {
            return Err(BarrierError::UndefinedObjective);
        }
        let nu = self.complexity();
        let mut x = start.clone();
        let mut t = options.initial_weight;
        let mut outer_steps = 0;
        loop {
            self.center(&mut x, t, options);
            outer_steps += 1;
            observe(&x);
            let objective = self.objective.value(&x).ok_or(BarrierError::UndefinedObjective)?;
            let gap = nu / t;
            if gap <= options.gap_tol * objective.abs().max(1.0) || outer_steps >= options.max_outer {
                return Ok(BarrierSolution { x, objective, outer_steps, gap });
            }
            t *= options.growth;
        }
    }

    /// Finds a strictly feasible point by minimising a slack `s` that
    /// relaxes every LMI (`F_j + sI ≻ 0`) and scalar constraint (`c_k < s`).
    pub fn find_interior(&self, options: &BarrierOptions) -> Result<Vector, BarrierError> {
        let m = self.dim();
        let mid = Vector::from_iterator(m, (0..m).map(|i| 0.5 * (self.lower[i] + self.upper[i])));
        if self.lmis.is_empty() && self.constraints.is_empty() {
            return Ok(mid);
        }
        let mut worst: f64 = f64::NEG_INFINITY;
        for lmi in &self.lmis {
            worst = worst.max(-linalg::lambda_min(&lmi.evaluate(&mid)));
        }
        for c in &self.constraints {
            worst = worst.max(c.value(&mid).ok_or(BarrierError::Infeasible { margin: f64::NAN })?);
        }
        let slack0 = worst.max(0.0) + 1.0;

        let lifted: Vec<Lifted> = self.constraints.iter().map(|c| Lifted { inner: *c, dim: m }).collect();
        let mut slope = Vector::zeros(m + 1);
        slope[m] = 1.0;
        let objective = Affine { slope, offset: 0.0 };
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        lower.push(-slack0);
        upper.push(slack0 + 1.0);
        let lmis = self
            .lmis
            .iter()
            .map(|lmi| {
                let k = lmi.size();
                let mut coefficients = lmi.coefficients.clone();
                coefficients.push(Matrix::identity(k, k));
                Lmi { constant: lmi.constant.clone(), coefficients }
            })
            .collect();
        let phase_one = BarrierProblem {
            lower,
            upper,
            objective: &objective,
            lmis,
            constraints: lifted.iter().map(|c| c as &dyn SmoothFn).collect(),
        };
        let mut start = mid.clone().insert_row(m, slack0);
        start[m] = slack0;
        let solution = phase_one.solve_from(&start, options, |_| {})?;
        let slack = solution.x[m];
        let x = solution.x.rows(0, m).into_owned();
        if slack < 0.0 && self.is_strictly_feasible(&x) {
            Ok(x)
        } else {
            Err(BarrierError::Infeasible { margin: -slack })
        }
    }

    /// Solves from `start` when it is strictly feasible, otherwise from a
    /// point found by [`Self::find_interior`].
    pub fn solve(
        &self,
        start: Option<&Vector>,
        options: &BarrierOptions,
        observe: impl FnMut(&Vector),
    ) -> Result<BarrierSolution, BarrierError> {
        let x0 = match start {
            Some(x) if self.is_strictly_feasible(x) && self.objective.value(x).is_some() => x.clone(),
            _ => self.find_interior(options)?,
        };
        self.solve_from(&x0, options, observe)
    }
}

/// `c(x_{0..m}) − x_m`, the phase-one relaxation of a scalar constraint.
struct Lifted<'a> {
    inner: &'a dyn SmoothFn,
    dim: usize,
}

impl SmoothFn for Lifted<'_> {
    fn value(&self, x: &Vector) -> Option<f64> {
        Some(self.inner.value(&x.rows(0, self.dim).into_owned())? - x[self.dim])
    }

    fn derivatives(&self, x: &Vector) -> Option<(f64, Vector, Matrix)> {
        let m = self.dim;
        let (v, g, h) = self.inner.derivatives(&x.rows(0, m).into_owned())?;
        let mut grad = g.insert_row(m, -1.0);
        grad[m] = -1.0;
        let mut hess = Matrix::zeros(m + 1, m + 1);
        hess.view_mut((0, 0), (m, m)).copy_from(&h);
        Some((v - x[m], grad, hess))
    }
}

/// Solves `H d = g`, adding diagonal loading when `H` is not numerically
/// positive definite.
fn newton_solve(hess: &Matrix, grad: &Vector) -> Vector {
    if let Some(chol) = linalg::cholesky(hess) {
        return chol.solve(grad);
    }
    let m = hess.nrows();
    let scale = (hess.trace().abs() / m.max(1) as f64).max(1e-300);
    let mut loading = 1e-14 * scale;
    loop {
        let shifted = hess + Matrix::identity(m, m) * loading;
        if let Some(chol) = linalg::cholesky(&shifted) {
            return chol.solve(grad);
        }
        loading *= 10.0;
    }
}
