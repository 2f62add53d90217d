use crate::error::{invalid, Result};
use crate::scalar::{to_f64, Real};
use crate::spectral::{GridSpec, VectorField};

/// Time envelope `K_t t^κ` of a drift.
///
/// `K` is given as a table of `(t, K_t)` pairs, interpolated linearly and held constant
/// outside the table; an empty table means `K ≡ 1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeModulation {
    pub kappa: f64,
    table: Vec<(f64, f64)>,
}

impl TimeModulation {
    pub fn new(kappa: f64, table: Vec<(f64, f64)>) -> Result<Self> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return invalid(format!("kappa must be finite and >= 0, got {kappa}"));
        }
        if table.windows(2).any(|w| w[1].0 <= w[0].0) {
            return invalid("K table times must be strictly increasing");
        }
        if table.windows(2).any(|w| w[1].1 < w[0].1) {
            return invalid("K table values must be nondecreasing");
        }
        if table.iter().any(|&(t, k)| !t.is_finite() || !(k >= 1.0) || !k.is_finite()) {
            return invalid("K table values must be finite and >= 1");
        }
        Ok(Self { kappa, table })
    }

    /// `K ≡ 1` with exponent `kappa`.
    pub fn power(kappa: f64) -> Result<Self> {
        Self::new(kappa, Vec::new())
    }

    pub fn k_value(&self, t: f64) -> f64 {
        let tab = &self.table;
        match tab.len() {
            0 => 1.0,
            _ if t <= tab[0].0 => tab[0].1,
            _ if t >= tab[tab.len() - 1].0 => tab[tab.len() - 1].1,
            _ => {
                let j = tab.partition_point(|&(s, _)| s <= t);
                let (t0, k0) = tab[j - 1];
                let (t1, k1) = tab[j];
                k0 + (k1 - k0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// `K_t t^κ` (equal to `K_t` when `κ = 0`, including at `t = 0`).
    pub fn factor(&self, t: f64) -> f64 {
        let tk = if self.kappa == 0.0 { 1.0 } else { t.max(0.0).powf(self.kappa) };
        self.k_value(t) * tk
    }

    pub fn table(&self) -> &[(f64, f64)] {
        &self.table
    }
}

/// Interaction kernel families.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelVariant<T> {
    /// `h(z) = diag(c) z / |z|^{d + 2 n0 + eps0}`.
    RieszOrder { c: Vec<f64>, n0: u32, eps0: f64 },
    /// `e (e·∇)^order δ_0`.
    DiracDerivative { order: u32, direction: Vec<f64> },
    /// `h ≡ c`.
    ConstantVector(Vec<f64>),
    /// Kernel sampled on a grid with the origin at index `n/2` along each axis.
    GridSampled(VectorField<T>),
}

impl<T: Real> KernelVariant<T> {
    /// Whether the kernel is too singular at the origin to sample without smoothing.
    pub fn is_singular(&self) -> bool {
        matches!(self, KernelVariant::RieszOrder { .. } | KernelVariant::DiracDerivative { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelVariant::RieszOrder { .. } => "riesz_order",
            KernelVariant::DiracDerivative { .. } => "dirac_derivative",
            KernelVariant::ConstantVector(_) => "constant",
            KernelVariant::GridSampled(_) => "grid_sampled",
        }
    }

    /// Dimension fixed by the parameters.
    pub fn dim(&self) -> usize {
        match self {
            KernelVariant::RieszOrder { c, .. } => c.len(),
            KernelVariant::DiracDerivative { direction, .. } => direction.len(),
            KernelVariant::ConstantVector(c) => c.len(),
            KernelVariant::GridSampled(f) => f.grid().dim(),
        }
    }
}

/// A kernel family, its heat mollification time and its time envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec<T> {
    pub variant: KernelVariant<T>,
    /// Heat time `ε` of the smoothing `h_ε = P_ε h`.
    pub mollification: f64,
    pub modulation: TimeModulation,
}

impl<T: Real> KernelSpec<T> {
    pub fn new(variant: KernelVariant<T>, mollification: f64, modulation: TimeModulation) -> Result<Self> {
        if !(mollification >= 0.0) || !mollification.is_finite() {
            return invalid(format!("mollification must be finite and >= 0, got {mollification}"));
        }
        let d = variant.dim();
        if d != 1 && d != 2 {
            return invalid(format!("kernel dimension must be 1 or 2, got {d}"));
        }
        match &variant {
            KernelVariant::RieszOrder { c, eps0, .. } => {
                if !(0.0..2.0).contains(eps0) {
                    return invalid(format!("eps0 must lie in [0, 2), got {eps0}"));
                }
                if c.iter().all(|&v| v == 0.0) {
                    return invalid("Riesz-order kernel needs a nonzero coefficient vector");
                }
            }
            KernelVariant::DiracDerivative { order, direction } => {
                if *order > 2 {
                    return invalid(format!("Dirac derivative order must be 0, 1 or 2, got {order}"));
                }
                let norm: f64 = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
                if !(norm > 0.0) {
                    return invalid("Dirac derivative direction must be nonzero");
                }
            }
            KernelVariant::ConstantVector(c) => {
                if c.iter().any(|v| !v.is_finite()) {
                    return invalid("constant kernel must be finite");
                }
            }
            KernelVariant::GridSampled(_) => {}
        }
        Ok(Self { variant, mollification, modulation })
    }

    /// Kernel with `K ≡ 1`, `κ = 0`.
    pub fn stationary(variant: KernelVariant<T>, mollification: f64) -> Result<Self> {
        Self::new(variant, mollification, TimeModulation::default())
    }

    pub fn with_mollification(&self, eps: f64) -> Result<Self> {
        Self::new(self.variant.clone(), eps, self.modulation.clone())
    }

    /// Riesz exponent `β = 2 n0 + eps0` (zero for other families).
    pub fn riesz_beta(&self) -> Option<f64> {
        match self.variant {
            KernelVariant::RieszOrder { n0, eps0, .. } => Some(2.0 * n0 as f64 + eps0),
            _ => None,
        }
    }
}

/// Default smoothing time: four squared grid spacings.
pub fn default_mollification<T: Real>(grid: &GridSpec<T>) -> f64 {
    let h = to_f64(grid.spacing());
    4.0 * h * h
}
