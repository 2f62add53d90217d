use super::realize::PreparedKernel;
use super::spec::KernelSpec;
use crate::error::Result;
use crate::scalar::{cst, to_f64, Real};
use crate::spectral::{ensure_same_grid, ScalarField, Spectrum, VectorField};

/// A drift of the form `b_t(x, μ) = K_t t^κ B(μ)(x)`.
pub trait Drift<T: Real>: Send + Sync {
    /// The factor `K_t t^κ`.
    fn envelope(&self, t: f64) -> f64;

    /// `B(ρ)` without the time envelope.
    fn base_field(&self, rho: &ScalarField<T>) -> Result<VectorField<T>>;

    /// Same as [`Drift::base_field`] when the caller already holds the spectrum of `rho`.
    fn base_field_spectral(&self, rho: &ScalarField<T>, _rho_hat: &Spectrum<T>) -> Result<VectorField<T>> {
        self.base_field(rho)
    }

    /// True when `B ≡ 0`; lets the solver skip work.
    fn is_zero(&self) -> bool {
        false
    }

    /// True when `B(ρ)` does not depend on `ρ`, so a single pass solves the flow.
    fn is_state_independent(&self) -> bool {
        self.is_zero()
    }

    fn drift(&self, rho: &ScalarField<T>, t: f64) -> Result<VectorField<T>> {
        let f = self.envelope(t);
        if f == 0.0 || self.is_zero() {
            return Ok(VectorField::zeros(*rho.grid()));
        }
        Ok(self.base_field(rho)?.scale(cst(f)))
    }
}

/// The drift that vanishes identically.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroDrift;

impl<T: Real> Drift<T> for ZeroDrift {
    fn envelope(&self, _t: f64) -> f64 {
        0.0
    }

    fn base_field(&self, rho: &ScalarField<T>) -> Result<VectorField<T>> {
        Ok(VectorField::zeros(*rho.grid()))
    }

    fn is_zero(&self) -> bool {
        true
    }
}

impl<T: Real> Drift<T> for PreparedKernel<T> {
    fn envelope(&self, t: f64) -> f64 {
        self.modulation().factor(t)
    }

    fn base_field(&self, rho: &ScalarField<T>) -> Result<VectorField<T>> {
        self.convolve(rho)
    }

    fn base_field_spectral(&self, rho: &ScalarField<T>, rho_hat: &Spectrum<T>) -> Result<VectorField<T>> {
        ensure_same_grid(self.grid(), rho.grid())?;
        Ok(self.convolve_spectrum(rho_hat))
    }

    fn is_zero(&self) -> bool {
        (0..self.grid().dim()).all(|i| self.symbol(i).iter().all(|c| c.re == T::zero() && c.im == T::zero()))
    }

    /// Only the zero mode survives: the convolution is the constant `ĥ(0)/L^d` for any density.
    fn is_state_independent(&self) -> bool {
        (0..self.grid().dim())
            .all(|i| self.symbol(i).iter().skip(1).all(|c| c.re == T::zero() && c.im == T::zero()))
    }
}

/// Drift field together with its sensitivity to halving the mollification.
#[derive(Debug, Clone)]
pub struct DriftEvaluation<T> {
    pub field: VectorField<T>,
    /// `sup |b_ε - b_{ε/2}|`; zero when the kernel is not mollified.
    pub eps_sensitivity: f64,
}

/// `K_t t^κ (h_ε * ρ)` by spectral convolution.
pub fn drift_from_kernel<T: Real>(spec: &KernelSpec<T>, rho: &ScalarField<T>, t: f64) -> Result<DriftEvaluation<T>> {
    let kernel = PreparedKernel::new(spec, rho.grid())?;
    let rho_hat = Spectrum::forward(rho.grid(), rho.values());
    let f: T = cst(kernel.envelope(t));
    let field = kernel.base_field_spectral(rho, &rho_hat)?.scale(f);
    let eps_sensitivity = if spec.mollification > 0.0 {
        let half = PreparedKernel::new(&spec.with_mollification(spec.mollification / 2.0)?, rho.grid())?;
        let other = half.base_field_spectral(rho, &rho_hat)?.scale(f);
        to_f64(field.sup_distance(&other)?)
    } else {
        0.0
    };
    Ok(DriftEvaluation { field, eps_sensitivity })
}
