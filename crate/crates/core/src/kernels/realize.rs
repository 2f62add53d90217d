use num_complex::Complex;
use rayon::prelude::*;

use super::spec::{KernelSpec, KernelVariant, TimeModulation};
use super::symbol::kernel_symbol;
use crate::error::{Error, Result};
use crate::scalar::{cst, to_f64, Real};
use crate::spectral::{ensure_same_grid, heat_symbol, mode_of, GridSpec, ScalarField, Spectrum, VectorField};

/// A kernel's mollified symbol tabulated on one grid, ready for repeated convolutions.
#[derive(Debug, Clone)]
pub struct PreparedKernel<T> {
    grid: GridSpec<T>,
    symbols: Vec<Vec<Complex<T>>>,
    modulation: TimeModulation,
    mollification: f64,
    under_resolved: bool,
}

fn alternating_sign<T: Real>(grid: &GridSpec<T>, idx: usize) -> T {
    let ij = grid.unflatten(idx);
    if (ij[0] + ij[1]) % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

impl<T: Real> PreparedKernel<T> {
    pub fn new(spec: &KernelSpec<T>, grid: &GridSpec<T>) -> Result<Self> {
        let d = grid.dim();
        if spec.variant.dim() != d {
            return Err(Error::WrongDimension { expected: d, got: spec.variant.dim() });
        }
        if spec.variant.is_singular() && spec.mollification == 0.0 {
            return Err(Error::RequiresMollification);
        }
        let eps: T = cst(spec.mollification);
        let extent = to_f64(grid.extent());
        let symbols = match &spec.variant {
            KernelVariant::GridSampled(field) => {
                ensure_same_grid(grid, field.grid())?;
                let vol = grid.cell_volume();
                field
                    .components()
                    .iter()
                    .map(|comp| {
                        let spec_c = Spectrum::forward(grid, comp);
                        spec_c
                            .coeffs()
                            .iter()
                            .enumerate()
                            .map(|(idx, c)| {
                                let m = mode_of(grid, idx);
                                c * (vol * alternating_sign(grid, idx) * heat_symbol(&m, eps))
                            })
                            .collect()
                    })
                    .collect()
            }
            variant => {
                let per_mode: Vec<[Complex<T>; 2]> = (0..grid.len())
                    .into_par_iter()
                    .map(|idx| {
                        let m = mode_of(grid, idx);
                        let s = kernel_symbol(variant, &m, extent).expect("closed-form symbol");
                        let g = heat_symbol(&m, eps);
                        [s[0] * g, s[1] * g]
                    })
                    .collect();
                (0..d).map(|i| per_mode.iter().map(|s| s[i]).collect()).collect()
            }
        };
        let under_resolved = spec.mollification > 0.0 && !grid.resolves_heat_time(eps);
        if under_resolved {
            log::warn!(
                "mollification {} is under-resolved on a grid with spacing {}",
                spec.mollification,
                to_f64(grid.spacing())
            );
        }
        Ok(Self {
            grid: *grid,
            symbols,
            modulation: spec.modulation.clone(),
            mollification: spec.mollification,
            under_resolved,
        })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn modulation(&self) -> &TimeModulation {
        &self.modulation
    }

    pub fn mollification(&self) -> f64 {
        self.mollification
    }

    /// Mollified symbol of component `i` at each DFT index.
    pub fn symbol(&self, i: usize) -> &[Complex<T>] {
        &self.symbols[i]
    }

    /// Samples of the periodized mollified kernel, origin at index `n/2`.
    pub fn realize(&self) -> VectorField<T> {
        let inv_vol = T::one() / self.grid.cell_volume();
        let components = self
            .symbols
            .iter()
            .map(|sym| {
                let coeffs = sym
                    .iter()
                    .enumerate()
                    .map(|(idx, s)| s * (alternating_sign(&self.grid, idx) * inv_vol))
                    .collect();
                Spectrum::from_coeffs(&self.grid, coeffs).to_real()
            })
            .collect();
        let mut out = VectorField::from_parts(self.grid, components);
        out.under_resolved = self.under_resolved;
        out
    }

    /// Periodic convolution `h_ε * rho` (no time envelope).
    pub fn convolve(&self, rho: &ScalarField<T>) -> Result<VectorField<T>> {
        ensure_same_grid(&self.grid, rho.grid())?;
        let spec = Spectrum::forward(&self.grid, rho.values());
        Ok(self.convolve_spectrum(&spec))
    }

    pub(crate) fn convolve_spectrum(&self, rho_hat: &Spectrum<T>) -> VectorField<T> {
        let components = self
            .symbols
            .iter()
            .map(|sym| {
                let coeffs = rho_hat.coeffs().iter().zip(sym).map(|(a, b)| a * b).collect();
                Spectrum::from_coeffs(&self.grid, coeffs).to_real()
            })
            .collect();
        let mut out = VectorField::from_parts(self.grid, components);
        out.under_resolved = self.under_resolved;
        out
    }
}

/// Mollified kernel `h_ε = P_ε h` sampled on `grid` via its Fourier symbol.
pub fn realize_kernel<T: Real>(spec: &KernelSpec<T>, grid: &GridSpec<T>) -> Result<VectorField<T>> {
    Ok(PreparedKernel::new(spec, grid)?.realize())
}
