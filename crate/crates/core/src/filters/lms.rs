use crate::sampling::SamplingDraw;
use crate::spectral::Bandlimit;
use crate::Vector;

use super::{check_len, FilterError};

/// Graph LMS: `x̂ ← x̂ + μ B_F D_S (y − x̂)`.
#[derive(Debug, Clone)]
pub struct LmsFilter {
    estimate: Vector,
    step: f64,
}

impl LmsFilter {
    /// Starts from the zero signal.
    pub fn new(band: &Bandlimit, step: f64) -> Result<Self, FilterError> {
        Self::with_estimate(band, &Vector::zeros(band.node_count()), step)
    }

    /// Starts from the projection of `initial` onto the band.
    pub fn with_estimate(band: &Bandlimit, initial: &Vector, step: f64) -> Result<Self, FilterError> {
        if !(step >= 0.0 && step.is_finite()) {
            return Err(FilterError::InvalidParameter(format!("step size must be nonnegative, got {step}")));
        }
        check_len(band.node_count(), initial.len())?;
        let estimate = band.project(initial).expect("length checked");
        Ok(Self { estimate, step })
    }

    pub fn estimate(&self) -> &Vector {
        &self.estimate
    }

    pub fn step_size(&self) -> f64 {
        self.step
    }

    /// GFT coefficients of the estimate on the band.
    pub fn coefficients(&self, band: &Bandlimit) -> Vector {
        band.basis().tr_mul(&self.estimate)
    }

    /// One update using only the sampled rows, `O(|F|·|S|)` work.
    pub fn step(&mut self, y: &Vector, draw: &SamplingDraw, band: &Bandlimit) -> Result<(), FilterError> {
        let n = band.node_count();
        check_len(n, y.len())?;
        check_len(n, draw.mask().len())?;
        let basis = band.basis();
        let mut coeffs = Vector::zeros(band.bandwidth());
        for i in (0..n).filter(|&i| draw.is_sampled(i)) {
            let innovation = y[i] - self.estimate[i];
            coeffs.axpy(innovation, &basis.row(i).transpose(), 1.0);
        }
        self.estimate.gemv(self.step, basis, &coeffs, 1.0);
        Ok(())
    }
}
