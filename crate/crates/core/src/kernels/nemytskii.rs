use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::drift::Drift;
use super::spec::TimeModulation;
use crate::error::{invalid, Error, Result};
use crate::scalar::{cst, to_f64, Real};
use crate::spectral::{field_derivative, ScalarField, VectorField, MAX_DERIVATIVE_ORDER};

/// Built-in maps `F: H_n → R^d` (`H_n` holds `(∇^i f)_{i<n}` at one point).
#[derive(Debug, Clone, PartialEq)]
pub enum NemytskiiFamily {
    Zero,
    /// `F(h) = h_0 e` with `|e| ≤ 1`.
    DensityValue { direction: Vec<f64> },
    /// `F(h) = clamp(h_1, -cap, cap)` componentwise; needs `n ≥ 2`.
    ClippedGradient { cap: f64 },
}

impl NemytskiiFamily {
    /// Lipschitz constant of the map in the Euclidean norm of `H_n`.
    pub fn lipschitz(&self) -> f64 {
        match self {
            NemytskiiFamily::Zero => 0.0,
            NemytskiiFamily::DensityValue { direction } => direction.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NemytskiiFamily::ClippedGradient { .. } => 1.0,
        }
    }
}

/// Drift `b_t(x) = K_t t^κ F(ρ^{⟨n⟩}(x))` built from derivatives of the density up to order `n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NemytskiiSpec {
    pub n: usize,
    pub dim: usize,
    pub family: NemytskiiFamily,
    pub modulation: TimeModulation,
}

impl NemytskiiSpec {
    pub fn new(n: usize, dim: usize, family: NemytskiiFamily, modulation: TimeModulation) -> Result<Self> {
        if n == 0 {
            return invalid("derivative depth n must be at least 1");
        }
        if n - 1 > MAX_DERIVATIVE_ORDER {
            return Err(Error::UnsupportedOrder { order: n - 1, max: MAX_DERIVATIVE_ORDER });
        }
        if dim != 1 && dim != 2 {
            return invalid(format!("dimension must be 1 or 2, got {dim}"));
        }
        match &family {
            NemytskiiFamily::Zero => {}
            NemytskiiFamily::DensityValue { direction } => {
                if direction.len() != dim {
                    return Err(Error::WrongDimension { expected: dim, got: direction.len() });
                }
                if !(family.lipschitz() <= 1.0) {
                    return invalid("density-value direction must have length at most 1");
                }
            }
            NemytskiiFamily::ClippedGradient { cap } => {
                if n < 2 {
                    return invalid("clipped-gradient family needs n >= 2");
                }
                if !(*cap > 0.0) || !cap.is_finite() {
                    return invalid(format!("cap must be positive and finite, got {cap}"));
                }
            }
        }
        Ok(Self { n, dim, family, modulation })
    }

    /// Number of scalar entries of an `H_n` value: `Σ_{i<n} d^i`.
    pub fn jet_len(&self) -> usize {
        (0..self.n).map(|i| self.dim.pow(i as u32)).sum()
    }

    /// `F(h)` for one jet `h` laid out as `[h_0, ∇h (d), ∇²h (d²), …]`.
    pub fn apply_map(&self, jet: &[f64], out: &mut [f64]) {
        match &self.family {
            NemytskiiFamily::Zero => out.iter_mut().for_each(|v| *v = 0.0),
            NemytskiiFamily::DensityValue { direction } => {
                for (o, e) in out.iter_mut().zip(direction) {
                    *o = jet[0] * e;
                }
            }
            NemytskiiFamily::ClippedGradient { cap } => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = jet[1 + i].clamp(-cap, *cap);
                }
            }
        }
    }
}

/// Axis counts of every ordered multi-index of length `i`, in lexicographic order.
fn tensor_orders(dim: usize, i: usize) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    for code in 0..dim.pow(i as u32) {
        let mut c = code;
        let mut counts = [0usize; 2];
        for _ in 0..i {
            counts[c % dim] += 1;
            c /= dim;
        }
        out.push(counts);
    }
    out
}

/// The jet `(∇^i ρ)_{i<n}` at every grid point, one field per entry.
pub fn density_jet<T: Real>(rho: &ScalarField<T>, n: usize) -> Result<Vec<ScalarField<T>>> {
    if n == 0 || n - 1 > MAX_DERIVATIVE_ORDER {
        return Err(Error::UnsupportedOrder { order: n.saturating_sub(1), max: MAX_DERIVATIVE_ORDER });
    }
    let dim = rho.grid().dim();
    let mut out = Vec::new();
    for i in 0..n {
        let orders = tensor_orders(dim, i);
        let mut cache: Vec<([usize; 2], ScalarField<T>)> = Vec::new();
        for o in orders {
            let f = match cache.iter().find(|(k, _)| *k == o) {
                Some((_, f)) => f.clone(),
                None => {
                    let f = field_derivative(rho, &o[..dim])?;
                    cache.push((o, f.clone()));
                    f
                }
            };
            out.push(f);
        }
    }
    Ok(out)
}

/// `K_t t^κ F(ρ^{⟨n⟩})` on the grid of `rho`.
pub fn nemytskii_drift<T: Real>(spec: &NemytskiiSpec, rho: &ScalarField<T>, t: f64) -> Result<VectorField<T>> {
    let f = spec.modulation.factor(t);
    Ok(spec.base_field(rho)?.scale(cst(f)))
}

impl<T: Real> Drift<T> for NemytskiiSpec {
    fn envelope(&self, t: f64) -> f64 {
        self.modulation.factor(t)
    }

    fn base_field(&self, rho: &ScalarField<T>) -> Result<VectorField<T>> {
        let grid = *rho.grid();
        if grid.dim() != self.dim {
            return Err(Error::WrongDimension { expected: self.dim, got: grid.dim() });
        }
        if matches!(self.family, NemytskiiFamily::Zero) {
            return Ok(VectorField::zeros(grid));
        }
        let jet = density_jet(rho, self.n)?;
        let mut comps = vec![vec![T::zero(); grid.len()]; self.dim];
        let mut h = vec![0.0; jet.len()];
        let mut out = vec![0.0; self.dim];
        for p in 0..grid.len() {
            for (hv, f) in h.iter_mut().zip(&jet) {
                *hv = to_f64(f.values()[p]);
            }
            self.apply_map(&h, &mut out);
            for (c, v) in comps.iter_mut().zip(&out) {
                c[p] = cst(*v);
            }
        }
        VectorField::new(grid, comps)
    }

    fn is_zero(&self) -> bool {
        matches!(self.family, NemytskiiFamily::Zero)
    }
}

/// Outcome of the sampled Lipschitz check of `F_t = K_t t^κ F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzReport {
    pub pairs: usize,
    /// Largest `|F_t(h) - F_t(h̃)| / ‖h - h̃‖` seen.
    pub max_ratio: f64,
    /// `K_t t^κ`.
    pub envelope: f64,
}

impl LipschitzReport {
    pub fn passed(&self) -> bool {
        self.max_ratio <= self.envelope * (1.0 + 1e-12)
    }
}

/// Samples jet pairs at several scales (some straddling the clipping level) and
/// maximizes the Lipschitz quotient.
pub fn lipschitz_check(spec: &NemytskiiSpec, t: f64, pairs: usize, seed: u64) -> LipschitzReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = spec.jet_len();
    let env = spec.modulation.factor(t);
    let scale_ref = match spec.family {
        NemytskiiFamily::ClippedGradient { cap } => cap,
        _ => 1.0,
    };
    let mut max_ratio: f64 = 0.0;
    let (mut fa, mut fb) = (vec![0.0; spec.dim], vec![0.0; spec.dim]);
    for _ in 0..pairs {
        let s = scale_ref * 10f64.powf(rng.random_range(-2.0..2.0));
        let a: Vec<f64> = (0..len).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect();
        let gap = s * 10f64.powf(rng.random_range(-3.0..0.5));
        let b: Vec<f64> = a.iter().map(|v| v + gap * rng.sample::<f64, _>(StandardNormal)).collect();
        spec.apply_map(&a, &mut fa);
        spec.apply_map(&b, &mut fb);
        let num: f64 = fa.iter().zip(&fb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt() * env;
        let den: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        if den > 0.0 {
            max_ratio = max_ratio.max(num / den);
        }
    }
    LipschitzReport { pairs, max_ratio, envelope: env }
}
