use std::fmt;

use crate::error::{invalid, Result};

/// Integrability exponent in `[1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(k: f64) -> Result<Self> {
        if k.is_infinite() && k > 0.0 {
            return Ok(Exponent::Infinity);
        }
        if !(k >= 1.0) || !k.is_finite() {
            return invalid(format!("exponent must lie in [1, inf], got {k}"));
        }
        Ok(Exponent::Finite(k))
    }

    /// Value as `f64`, with `∞` mapped to `f64::INFINITY`.
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(k) => k,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// `1/k`, zero for `k = ∞`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(k) => 1.0 / k,
            Exponent::Infinity => 0.0,
        }
    }

    /// Hölder conjugate `k' = k/(k-1)`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(k) if k == 1.0 => Exponent::Infinity,
            Exponent::Finite(k) => Exponent::Finite(k / (k - 1.0)),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(k) => write!(f, "{k}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

/// Smoothness and integrability pair `(δ, k)` of a local negative Sobolev space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevIndex {
    pub delta: f64,
    pub k: Exponent,
}

impl SobolevIndex {
    pub fn new(delta: f64, k: f64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return invalid(format!("smoothness index must be finite and >= 0, got {delta}"));
        }
        Ok(Self { delta, k: Exponent::new(k)? })
    }
}

impl fmt::Display for SobolevIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(delta={}, k={})", self.delta, self.k)
    }
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let df = d as f64;
    std::f64::consts::PI.powf(df / 2.0) / libm::tgamma(df / 2.0 + 1.0)
}

/// Constant `c` with `‖f‖_{W̃^{-δ,k}} <= c ‖f‖_∞`, hence `‖μ-ν‖_var <= c ‖μ-ν‖_{δ,k*}`.
///
/// The Bessel potential is an average of heat kernels with total weight one, so
/// the bound reduces to the unit-ball volume factor.
pub fn sup_norm_constant(idx: SobolevIndex, d: usize) -> f64 {
    unit_ball_volume(d).powf(idx.k.reciprocal())
}
