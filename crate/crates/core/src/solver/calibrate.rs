use super::params::FlowParams;
use crate::error::Result;
use crate::kernels::{default_mollification, Drift, KernelSpec, KernelVariant, PreparedKernel, TimeModulation};
use crate::scalar::{to_f64, Real};
use crate::sobolev::{measure_dual_norm, BallLattice, DualMethod};
use crate::spectral::{GridSpec, ScalarField};

/// Target for `Lip · T` of the calibrated instance.
pub const LIPSCHITZ_HORIZON_TARGET: f64 = 0.45;

/// Singular-kernel instance with an amplitude small enough for a clean contraction.
#[derive(Debug, Clone)]
pub struct SmallInstance<T> {
    pub spec: KernelSpec<T>,
    pub params: FlowParams,
    pub amplitude: f64,
    /// Measured `sup |b_t(μ) - b_t(ν)| / ‖μ - ν‖_{δ,k*}` over the probe pairs and `t ≤ T`.
    pub lipschitz: f64,
}

fn riesz_spec<T: Real>(grid: &GridSpec<T>, amplitude: f64) -> Result<KernelSpec<T>> {
    KernelSpec::new(
        KernelVariant::RieszOrder { c: vec![amplitude], n0: 0, eps0: 0.5 },
        default_mollification(grid),
        TimeModulation::power(0.5)?,
    )
}

/// Sampled Lipschitz constant of `μ ↦ b_t(·, μ)` from the dual norm to the sup norm.
pub fn measured_lipschitz<T: Real>(spec: &KernelSpec<T>, grid: &GridSpec<T>, params: &FlowParams) -> Result<f64> {
    let kernel = PreparedKernel::new(spec, grid)?;
    let lat = BallLattice::new(grid)?;
    let env = params
        .time_grid
        .iter()
        .map(|&t| kernel.envelope(t))
        .fold(0.0, f64::max);
    let mut probes = Vec::new();
    for &v in &[0.02, 0.05, 0.1] {
        for &m in &[-0.2, 0.0, 0.15] {
            probes.push(ScalarField::gaussian(*grid, [T::from_f64(m).unwrap(), T::zero()], T::from_f64(v).unwrap())?);
        }
    }
    let mut best = 0.0f64;
    for (i, a) in probes.iter().enumerate() {
        for b in &probes[i + 1..] {
            let diff = a.sub(b)?;
            let denom = to_f64(measure_dual_norm(&diff, params.flow_index(), &lat, DualMethod::Amalgam)?);
            if denom <= 0.0 {
                continue;
            }
            let num = to_f64(kernel.base_field(a)?.sup_distance(&kernel.base_field(b)?)?);
            best = best.max(num / denom);
        }
    }
    Ok(best * env)
}

/// The small singular-kernel instance: `d = 1`, Riesz kernel with `β = 1/2` and `t^{1/2}` envelope,
/// `δ = 1`, `k = 2`, `(ε, p) = (0, ∞)`, amplitude bisected so that `Lip · T` meets the target.
pub fn small_singular_instance<T: Real>(grid: &GridSpec<T>, horizon: f64, times: usize) -> Result<SmallInstance<T>> {
    let params = FlowParams::new(1, 0.0, f64::INFINITY, 1.0, 2.0, 0.5, FlowParams::uniform_times(horizon, times), 0.0)?;
    let score = |a: f64| -> Result<f64> { Ok(measured_lipschitz(&riesz_spec(grid, a)?, grid, &params)? * horizon) };
    let (mut lo, mut hi) = (0.0, 1.0);
    while score(hi)? < LIPSCHITZ_HORIZON_TARGET {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if score(mid)? < LIPSCHITZ_HORIZON_TARGET {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let spec = riesz_spec(grid, lo)?;
    let lipschitz = measured_lipschitz(&spec, grid, &params)?;
    Ok(SmallInstance { spec, params, amplitude: lo, lipschitz })
}
