use num_complex::Complex;

use super::fft::{real_symbol, Mode, Spectrum};
use super::field::{ScalarField, VectorField};
use super::quadrature::GammaRule;
use crate::error::{invalid, Error, Result};
use crate::scalar::{cst, to_f64, Real};

/// How `(1 - Δ)^{-r}` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselMode {
    /// Direct Fourier multiplier `(1 + |ξ|²)^{-r}`.
    Spectral,
    /// `Γ(r)^{-1} ∫ s^{r-1} e^{-s} e^{sΔ} ds` on a graded Gauss rule.
    GammaQuadrature { nodes: usize },
}

impl Default for BesselMode {
    fn default() -> Self {
        BesselMode::Spectral
    }
}

/// Largest total derivative order supported by [`field_derivative`].
pub const MAX_DERIVATIVE_ORDER: usize = 4;

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t > T::zero()) || !t.is_finite() {
        return invalid(format!("heat time must be positive and finite, got {t}"));
    }
    Ok(())
}

/// Heat multiplier `e^{-t|ξ|²/2}` (generator `Δ/2`).
#[inline]
pub fn heat_symbol<T: Real>(mode: &Mode<T>, t: T) -> T {
    (-t * mode.norm_sq() / cst(2.0)).exp()
}

/// `P_t f`: convolution with the centered Gaussian of variance `t` per coordinate.
pub fn heat_apply<T: Real>(f: &ScalarField<T>, t: T) -> Result<ScalarField<T>> {
    check_time(t)?;
    let grid = *f.grid();
    let values = Spectrum::forward(&grid, f.values()).synthesize(|m| real_symbol(heat_symbol(m, t)));
    let mut out = ScalarField::from_parts(grid, values);
    out.under_resolved = f.under_resolved || !grid.resolves_heat_time(t);
    Ok(out)
}

/// `∇ P_t f`.
pub fn heat_gradient<T: Real>(f: &ScalarField<T>, t: T) -> Result<VectorField<T>> {
    check_time(t)?;
    let grid = *f.grid();
    let spec = Spectrum::forward(&grid, f.values());
    let components = (0..grid.dim())
        .map(|axis| {
            let mut order = [0usize; 2];
            order[axis] = 1;
            spec.synthesize(|m| m.derivative_symbol(order) * heat_symbol(m, t))
        })
        .collect();
    let mut out = VectorField::from_parts(grid, components);
    out.under_resolved = f.under_resolved || !grid.resolves_heat_time(t);
    Ok(out)
}

/// Bessel multiplier `(1 + |ξ|²)^{-r}`.
#[inline]
pub fn bessel_symbol<T: Real>(mode: &Mode<T>, r: T) -> T {
    (T::one() + mode.norm_sq()).powf(-r)
}

/// Bessel potential `(1 - Δ)^{-r} f`.
pub fn bessel_apply<T: Real>(f: &ScalarField<T>, r: T, mode: BesselMode) -> Result<ScalarField<T>> {
    if r == T::zero() && mode == BesselMode::Spectral {
        return Ok(f.clone());
    }
    let grid = *f.grid();
    let spec = Spectrum::forward(&grid, f.values());
    let values = bessel_on_spectrum(&spec, r, mode)?.to_real();
    let mut out = ScalarField::from_parts(grid, values);
    out.under_resolved = f.under_resolved;
    Ok(out)
}

/// Componentwise Bessel potential of a vector field.
pub fn bessel_apply_vector<T: Real>(
    f: &VectorField<T>,
    r: T,
    mode: BesselMode,
) -> Result<VectorField<T>> {
    let grid = *f.grid();
    let components = f
        .components()
        .iter()
        .map(|c| Ok(bessel_on_spectrum(&Spectrum::forward(&grid, c), r, mode)?.to_real()))
        .collect::<Result<Vec<_>>>()?;
    let mut out = VectorField::from_parts(grid, components);
    out.under_resolved = f.under_resolved;
    Ok(out)
}

pub(crate) fn bessel_on_spectrum<T: Real>(
    spec: &Spectrum<T>,
    r: T,
    mode: BesselMode,
) -> Result<Spectrum<T>> {
    if !(r >= T::zero()) || !r.is_finite() {
        return invalid(format!("Bessel order must be nonnegative and finite, got {r}"));
    }
    match mode {
        BesselMode::Spectral => {
            if r == T::zero() {
                return Ok(spec.clone());
            }
            Ok(spec.multiply(|m| real_symbol(bessel_symbol(m, r))))
        }
        BesselMode::GammaQuadrature { nodes } => {
            if r == T::zero() {
                return invalid("gamma quadrature needs r > 0");
            }
            let rule = GammaRule::new(to_f64(r), nodes)?;
            // Sum of e^{-s_j} P_{2 s_j} f, i.e. heat flow at time 2s for generator Δ/2.
            let zero = Complex::new(T::zero(), T::zero());
            let mut acc = Spectrum::from_coeffs(spec.grid(), vec![zero; spec.coeffs().len()]);
            for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
                let s_t: T = cst(s);
                let evolved = spec.multiply(|m| real_symbol(heat_symbol(m, cst::<T>(2.0) * s_t)));
                acc.add_scaled(&evolved, real_symbol(cst(w)));
            }
            Ok(acc)
        }
    }
}

/// Spectral partial derivative `∂^order f`, total order at most 4.
pub fn field_derivative<T: Real>(f: &ScalarField<T>, order: &[usize]) -> Result<ScalarField<T>> {
    let grid = *f.grid();
    if order.len() > grid.dim() && order[grid.dim()..].iter().any(|&o| o > 0) {
        return Err(Error::WrongDimension { expected: grid.dim(), got: order.len() });
    }
    let total: usize = order.iter().sum();
    if total > MAX_DERIVATIVE_ORDER {
        return Err(Error::UnsupportedOrder { order: total, max: MAX_DERIVATIVE_ORDER });
    }
    if total == 0 {
        return Ok(f.clone());
    }
    let mut alpha = [0usize; 2];
    for (a, &o) in alpha.iter_mut().zip(order) {
        *a = o;
    }
    let values = Spectrum::forward(&grid, f.values()).synthesize(|m| m.derivative_symbol(alpha));
    let mut out = ScalarField::from_parts(grid, values);
    out.under_resolved = f.under_resolved;
    Ok(out)
}

/// Spectral divergence of a vector field.
pub fn divergence<T: Real>(v: &VectorField<T>) -> ScalarField<T> {
    let grid = *v.grid();
    let mut total = vec![T::zero(); grid.len()];
    for axis in 0..grid.dim() {
        let mut order = [0usize; 2];
        order[axis] = 1;
        let d = Spectrum::forward(&grid, v.component(axis)).synthesize(|m| m.derivative_symbol(order));
        for (t, x) in total.iter_mut().zip(d) {
            *t += x;
        }
    }
    ScalarField::from_parts(grid, total)
}

/// Spectral gradient (no smoothing).
pub fn gradient<T: Real>(f: &ScalarField<T>) -> VectorField<T> {
    let grid = *f.grid();
    let spec = Spectrum::forward(&grid, f.values());
    let components = (0..grid.dim())
        .map(|axis| {
            let mut order = [0usize; 2];
            order[axis] = 1;
            spec.synthesize(|m| m.derivative_symbol(order))
        })
        .collect();
    VectorField::from_parts(grid, components)
}
