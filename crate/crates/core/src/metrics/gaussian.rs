use crate::error::{invalid, Result};
use crate::scalar::{cst, Real};
use crate::spectral::{GridSpec, ScalarField};

/// Isotropic Gaussian `N(mean, variance·I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    pub mean: Vec<f64>,
    pub variance: f64,
}

impl GaussianSpec {
    pub fn new(mean: Vec<f64>, variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() {
            return invalid(format!("variance must be positive, got {variance}"));
        }
        if mean.is_empty() || mean.len() > 2 || mean.iter().any(|m| !m.is_finite()) {
            return invalid("mean must have 1 or 2 finite entries");
        }
        Ok(Self { mean, variance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Periodized density on `grid`.
    pub fn density<T: Real>(&self, grid: GridSpec<T>) -> Result<ScalarField<T>> {
        if grid.dim() != self.dim() {
            return Err(crate::Error::WrongDimension { expected: grid.dim(), got: self.dim() });
        }
        let mut m = [T::zero(); 2];
        for (a, b) in m.iter_mut().zip(&self.mean) {
            *a = cst(*b);
        }
        ScalarField::gaussian(grid, m, cst(self.variance))
    }

    fn mean_gap_sq(&self, other: &Self) -> f64 {
        self.mean.iter().zip(&other.mean).map(|(a, b)| (a - b).powi(2)).sum()
    }

    /// Closed-form `W_2`.
    pub fn w2(&self, other: &Self) -> f64 {
        let d = self.dim() as f64;
        (self.mean_gap_sq(other) + d * (self.variance.sqrt() - other.variance.sqrt()).powi(2)).sqrt()
    }

    /// Closed-form `Ent(self | other)`.
    pub fn relative_entropy(&self, other: &Self) -> f64 {
        let d = self.dim() as f64;
        let r = self.variance / other.variance;
        0.5 * d * (r - 1.0 - r.ln()) + self.mean_gap_sq(other) / (2.0 * other.variance)
    }

    /// Closed-form total variation `∫|p - q|` when the variances agree.
    pub fn total_variation_equal_variance(&self, other: &Self) -> Option<f64> {
        if self.variance != other.variance {
            return None;
        }
        let gap = self.mean_gap_sq(other).sqrt();
        Some(2.0 * libm::erf(gap / (2.0 * (2.0 * self.variance).sqrt())))
    }
}
