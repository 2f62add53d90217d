//! Periodic grids, fields and spectral multipliers.

mod fft;
mod field;
mod grid;
mod ops;
pub mod quadrature;

pub use fft::{apply_symbol, mode_of, real_symbol, Mode, Spectrum};
pub use field::{ScalarField, VectorField};
#[allow(unused_imports)]
pub(crate) use field::ensure_same_grid;
pub use grid::GridSpec;
pub use ops::{
    bessel_apply, bessel_apply_vector, bessel_symbol, divergence, field_derivative, gradient,
    heat_apply, heat_gradient, heat_symbol, BesselMode, MAX_DERIVATIVE_ORDER,
};
#[allow(unused_imports)]
pub(crate) use ops::bessel_on_spectrum;
