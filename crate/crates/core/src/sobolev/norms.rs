use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::index::{Exponent, SobolevIndex};
use super::lattice::BallLattice;
use crate::error::{invalid, Error, Result};
use crate::scalar::{cst, to_f64, Real};
use crate::spectral::{bessel_symbol, real_symbol, BesselMode, ScalarField, Spectrum, VectorField};

/// `(1 - Δ)^{s}` for any real `s` by the spectral multiplier.
pub fn bessel_power<T: Real>(values: &Spectrum<T>, s: T) -> Vec<T> {
    if s == T::zero() {
        return values.to_real();
    }
    values.synthesize(|m| real_symbol(bessel_symbol(m, -s)))
}

/// `sup_z ‖1_{B(z,1)} (1-Δ)^{-δ/2} f‖_{L^k}` over the lattice centers.
pub fn local_neg_norm<T: Real>(f: &ScalarField<T>, idx: SobolevIndex, lat: &BallLattice) -> T {
    let smoothed = crate::spectral::bessel_apply(f, cst(idx.delta / 2.0), BesselMode::Spectral)
        .expect("nonnegative Bessel order");
    lat.sup_window_norm(smoothed.values(), idx.k.value())
}

/// Vector version: components are smoothed, then the pointwise Euclidean length is windowed.
pub fn local_neg_norm_vector<T: Real>(
    f: &VectorField<T>,
    idx: SobolevIndex,
    lat: &BallLattice,
) -> T {
    let smoothed = crate::spectral::bessel_apply_vector(f, cst(idx.delta / 2.0), BesselMode::Spectral)
        .expect("nonnegative Bessel order");
    lat.sup_window_norm(smoothed.magnitude().values(), idx.k.value())
}

/// Random test-function settings for the probe lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    /// Number of random test functions.
    pub count: usize,
    pub seed: u64,
    /// Largest angular frequency kept in the random noise (clamped to the grid's Nyquist).
    pub band: f64,
    /// Also try the Hölder extremizer of the smoothed measure and `sign(rho)`.
    pub structured: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { count: 256, seed: 0, band: 32.0, structured: true }
    }
}

/// How the dual norm `‖ρ‖_{δ,k*}` is estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DualMethod {
    /// Sum over cells of `‖1_cell (1-Δ)^{δ/2} ρ‖_{L^{k'}}`, cells fitting in unit balls,
    /// minimized over a few partition offsets; an upper bound.
    Amalgam,
    /// Max of `|∫ ρ g|` over normalized test functions; a lower bound.
    Probe(ProbeConfig),
}

/// Lower and upper estimates of the same dual norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualBracket<T> {
    pub lower: T,
    pub upper: T,
}

impl<T: Real> DualBracket<T> {
    /// `upper / lower`; infinite when the lower bound vanishes on a nonzero input.
    pub fn ratio(&self) -> T {
        if self.lower > T::zero() {
            self.upper / self.lower
        } else if self.upper > T::zero() {
            T::infinity()
        } else {
            T::one()
        }
    }
}

const MASS_TOLERANCE: f64 = 1e-6;

/// Dual norm of a signed measure with density `rho` (mass 0 or 1).
pub fn measure_dual_norm<T: Real>(
    rho: &ScalarField<T>,
    idx: SobolevIndex,
    lat: &BallLattice,
    method: DualMethod,
) -> Result<T> {
    let mass = to_f64(rho.integral());
    if mass.abs() > MASS_TOLERANCE && (mass - 1.0).abs() > MASS_TOLERANCE {
        return invalid(format!("dual norm needs a measure of mass 0 or 1, got {mass}"));
    }
    let lifted = lift(rho, idx);
    match method {
        DualMethod::Amalgam => amalgam(&lifted, idx, lat),
        DualMethod::Probe(cfg) => probe(rho, &lifted, idx, lat, cfg),
    }
}

/// Both estimates at once.
pub fn dual_bracket<T: Real>(
    rho: &ScalarField<T>,
    idx: SobolevIndex,
    lat: &BallLattice,
    cfg: ProbeConfig,
) -> Result<DualBracket<T>> {
    let upper = measure_dual_norm(rho, idx, lat, DualMethod::Amalgam)?;
    let lower = measure_dual_norm(rho, idx, lat, DualMethod::Probe(cfg))?;
    Ok(DualBracket { lower, upper })
}

/// `F = (1-Δ)^{δ/2} ρ`; then `∫ ρ g = ∫ F G` with `G = (1-Δ)^{-δ/2} g`.
fn lift<T: Real>(rho: &ScalarField<T>, idx: SobolevIndex) -> Vec<T> {
    let spec = Spectrum::forward(rho.grid(), rho.values());
    bessel_power(&spec, cst(idx.delta / 2.0))
}

fn amalgam<T: Real>(lifted: &[T], idx: SobolevIndex, lat: &BallLattice) -> Result<T> {
    let kp = match idx.k.conjugate() {
        Exponent::Infinity => {
            return Err(Error::Unsupported(
                "amalgam dual norm needs k > 1 (conjugate exponent must be finite)".into(),
            ))
        }
        Exponent::Finite(v) => v,
    };
    let kpt: T = cst(kp);
    let vol: T = cst(lat.cell_volume());
    let best = lat
        .partition_shifts()
        .into_iter()
        .map(|shift| {
            let (cells, count) = lat.partition(shift);
            let mut acc = vec![T::zero(); count];
            for (v, &c) in lifted.iter().zip(&cells) {
                if kp == 1.0 {
                    acc[c] += v.abs();
                } else {
                    acc[c] += v.abs().powf(kpt);
                }
            }
            acc.into_iter().map(|s| (s * vol).powf(T::one() / kpt)).sum::<T>()
        })
        .fold(T::infinity(), |a, b| a.min(b));
    Ok(best)
}

/// Value of one test function given through `G`: `|∫ F G| / sup-window ‖G‖_k`.
fn probe_value<T: Real>(lifted: &[T], g: &[T], k: f64, lat: &BallLattice) -> T {
    let norm = lat.sup_window_norm(g, k);
    if !(norm > T::zero()) {
        return T::zero();
    }
    let pairing: T = lifted.iter().zip(g).map(|(a, b)| *a * *b).sum::<T>() * cst(lat.cell_volume());
    pairing.abs() / norm
}

fn probe<T: Real>(
    rho: &ScalarField<T>,
    lifted: &[T],
    idx: SobolevIndex,
    lat: &BallLattice,
    cfg: ProbeConfig,
) -> Result<T> {
    if cfg.count == 0 {
        return invalid("probe method needs at least one test function");
    }
    let grid = *rho.grid();
    let k = idx.k.value();
    let nyquist = std::f64::consts::PI / to_f64(grid.spacing());
    let band = cfg.band.min(nyquist);
    let random_best = (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let noise: Vec<T> =
                (0..grid.len()).map(|_| cst::<T>(StandardNormal.sample(&mut rng))).collect();
            let g = band_limit(&grid, &noise, band);
            probe_value(lifted, &g, k, lat)
        })
        .reduce(|| T::zero(), |a, b| a.max(b));
    if !cfg.structured {
        return Ok(random_best);
    }
    let mut best = random_best;
    for g in structured_probes(rho, lifted, idx, lat) {
        best = best.max(probe_value(lifted, &g, k, lat));
    }
    Ok(best)
}

pub(crate) fn band_limit<T: Real>(grid: &crate::spectral::GridSpec<T>, values: &[T], band: f64) -> Vec<T> {
    let b: T = cst(band);
    Spectrum::forward(grid, values).synthesize(|m| {
        if m.norm() <= b {
            real_symbol(T::one())
        } else {
            real_symbol(T::zero())
        }
    })
}

/// Hölder extremizers of `F` (globally and on its heaviest window) plus `G` built from `sign(ρ)`.
fn structured_probes<T: Real>(
    rho: &ScalarField<T>,
    lifted: &[T],
    idx: SobolevIndex,
    lat: &BallLattice,
) -> Vec<Vec<T>> {
    let kp = idx.k.conjugate();
    let holder = |v: T| -> T {
        match kp {
            Exponent::Infinity => T::zero(),
            Exponent::Finite(q) if q == 1.0 => v.signum() * if v == T::zero() { T::zero() } else { T::one() },
            Exponent::Finite(q) => v.signum() * v.abs().powf(cst(q - 1.0)),
        }
    };
    let mut out = Vec::new();
    if kp.is_infinite() {
        // k = 1: the extremizer concentrates on the largest |F|.
        let (imax, _) = lifted
            .iter()
            .enumerate()
            .fold((0, T::zero()), |b, (i, v)| if v.abs() > b.1 { (i, v.abs()) } else { b });
        let mut g = vec![T::zero(); lifted.len()];
        g[imax] = lifted[imax].signum();
        out.push(g);
    } else {
        let global: Vec<T> = lifted.iter().map(|&v| holder(v)).collect();
        let (center, _) = lat.argmax_window(lifted, kp.value());
        let mut local = vec![T::zero(); lifted.len()];
        for i in lat.window_indices(center) {
            local[i] = global[i];
        }
        out.push(global);
        out.push(local);
    }
    // G = (1-Δ)^{-δ/2} sign(ρ), the smoothed test function with |g| <= 1.
    let sign: Vec<T> = rho.values().iter().map(|v| v.signum()).collect();
    let spec = Spectrum::forward(rho.grid(), &sign);
    out.push(bessel_power(&spec, cst(-idx.delta / 2.0)));
    out
}

/// Random probe values drawn exactly as in [`DualMethod::Probe`], without structured probes;
/// exposed so callers can study the distribution of the lower bound.
pub fn random_probe_values<T: Real>(
    rho: &ScalarField<T>,
    idx: SobolevIndex,
    lat: &BallLattice,
    cfg: ProbeConfig,
) -> Vec<T> {
    let grid = *rho.grid();
    let lifted = lift(rho, idx);
    let band = cfg.band.min(std::f64::consts::PI / to_f64(grid.spacing()));
    (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let noise: Vec<T> =
                (0..grid.len()).map(|_| cst::<T>(StandardNormal.sample(&mut rng))).collect();
            probe_value(&lifted, &band_limit(&grid, &noise, band), idx.k.value(), lat)
        })
        .collect()
}
