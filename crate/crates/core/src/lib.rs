//! Numerical toolkit for mean-field diffusions with singular interactions on a periodic grid.
//!
//! Everything is generic over the scalar type ([`Real`], implemented for `f32` and `f64`);
//! the `*64` aliases below are what most callers want.

pub mod error;
pub mod kernels;
pub mod metrics;
pub mod particles;
pub mod scalar;
pub mod sobolev;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use kernels::{Drift, KernelSpec, KernelVariant, NemytskiiSpec, TimeModulation};
pub use scalar::Real;
pub use sobolev::{BallLattice, Exponent, SobolevIndex};
pub use spectral::{BesselMode, GridSpec, ScalarField, VectorField};

pub type Grid64 = GridSpec<f64>;
pub type ScalarField64 = ScalarField<f64>;
pub type ScalarField32 = ScalarField<f32>;
pub type VectorField64 = VectorField<f64>;
