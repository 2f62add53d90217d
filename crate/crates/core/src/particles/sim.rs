use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::binning::{deposit_cic, interpolate_cic, sharpen};
use crate::error::{invalid, Error, Result};
use crate::kernels::Drift;
use crate::metrics::QuantileFunction;
use crate::scalar::{to_f64, Real};
use crate::spectral::{GridSpec, ScalarField};

/// Initial law of the particles.
#[derive(Debug, Clone)]
pub enum InitialSampler<T> {
    /// Isotropic Gaussian mixture: `(weight, mean, variance)` per component.
    GaussianMixture(Vec<(f64, Vec<f64>, f64)>),
    /// Inverse-CDF sampling from a grid density (uniform within the chosen cell in 2D).
    GridDensity(ScalarField<T>),
}

impl<T: Real> InitialSampler<T> {
    pub fn gaussian(mean: Vec<f64>, variance: f64) -> Self {
        InitialSampler::GaussianMixture(vec![(1.0, mean, variance)])
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            InitialSampler::GaussianMixture(parts) => {
                if parts.is_empty() {
                    return invalid("mixture needs at least one component");
                }
                let total: f64 = parts.iter().map(|p| p.0).sum();
                if parts.iter().any(|p| !(p.0 >= 0.0) || p.1.len() != dim || !(p.2 > 0.0)) || !(total > 0.0) {
                    return invalid("mixture components need weight >= 0, matching dimension and variance > 0");
                }
                Ok(())
            }
            InitialSampler::GridDensity(rho) => {
                if rho.grid().dim() != dim {
                    return Err(Error::WrongDimension { expected: dim, got: rho.grid().dim() });
                }
                rho.check_density()
            }
        }
    }
}

/// Prepared sampler: cumulative tables built once.
enum Sampler {
    Mixture { cum: Vec<f64>, parts: Vec<(Vec<f64>, f64)> },
    Quantile(QuantileFunction),
    Cells { cum: Vec<f64>, centers: Vec<[f64; 2]>, spacing: f64 },
}

impl Sampler {
    fn new<T: Real>(s: &InitialSampler<T>) -> Result<Self> {
        Ok(match s {
            InitialSampler::GaussianMixture(parts) => {
                let total: f64 = parts.iter().map(|p| p.0).sum();
                let mut acc = 0.0;
                let cum = parts
                    .iter()
                    .map(|p| {
                        acc += p.0 / total;
                        acc
                    })
                    .collect();
                Sampler::Mixture { cum, parts: parts.iter().map(|p| (p.1.clone(), p.2)).collect() }
            }
            InitialSampler::GridDensity(rho) if rho.grid().dim() == 1 => {
                Sampler::Quantile(QuantileFunction::from_density(rho)?)
            }
            InitialSampler::GridDensity(rho) => {
                let g = rho.grid();
                let vol = to_f64(g.cell_volume());
                let mut acc = 0.0;
                let cum = rho
                    .values()
                    .iter()
                    .map(|v| {
                        acc += to_f64(*v) * vol;
                        acc
                    })
                    .collect();
                let centers = (0..g.len()).map(|i| g.position(i).map(to_f64)).collect();
                Sampler::Cells { cum, centers, spacing: to_f64(g.spacing()) }
            }
        })
    }

    fn draw(&self, dim: usize, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        match self {
            Sampler::Mixture { cum, parts } => {
                let u: f64 = rng.random();
                let i = cum.partition_point(|&c| c < u).min(parts.len() - 1);
                let (mean, var) = &parts[i];
                for (o, m) in out.iter_mut().zip(mean) {
                    let z: f64 = rng.sample(StandardNormal);
                    *o = m + var.sqrt() * z;
                }
            }
            Sampler::Quantile(q) => out[0] = q.eval(rng.random()),
            Sampler::Cells { cum, centers, spacing } => {
                let u: f64 = rng.random::<f64>() * cum.last().copied().unwrap_or(1.0);
                let i = cum.partition_point(|&c| c < u).min(centers.len() - 1);
                for (axis, o) in out.iter_mut().enumerate().take(dim) {
                    *o = centers[i][axis] + spacing * (rng.random::<f64>() - 0.5);
                }
            }
        }
    }
}

/// Configuration of an interacting-particle run.
#[derive(Debug, Clone)]
pub struct SimConfig<T> {
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    /// Mollification of the interaction kernel; bounds `dt` from above.
    pub mollification_eps: f64,
    pub initial: InitialSampler<T>,
    /// Grid on which the empirical measure is binned for the drift.
    pub grid: GridSpec<T>,
    /// Times (multiples of `dt`) at which the ensemble is recorded; the horizon is always recorded.
    pub checkpoints: Vec<f64>,
    /// Divide deposit and interpolation by their Fourier transfer functions.
    pub deconvolve: bool,
}

impl<T: Real> SimConfig<T> {
    pub fn new(dt: f64, horizon: f64, seed: u64, mollification_eps: f64, initial: InitialSampler<T>, grid: GridSpec<T>) -> Self {
        Self { dt, horizon, seed, mollification_eps, initial, grid, checkpoints: Vec::new(), deconvolve: true }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.horizon > 0.0) {
            return invalid("dt and horizon must be positive");
        }
        let steps = self.horizon / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return invalid(format!("horizon {} is not a multiple of dt {}", self.horizon, self.dt));
        }
        if self.dt > self.mollification_eps {
            return invalid(format!("dt = {} exceeds the mollification {}", self.dt, self.mollification_eps));
        }
        for &c in &self.checkpoints {
            let k = c / self.dt;
            if !(c > 0.0 && c <= self.horizon * (1.0 + 1e-12)) || (k - k.round()).abs() > 1e-6 {
                return invalid(format!("checkpoint {c} is not a multiple of dt in (0, T]"));
            }
        }
        self.initial.validate(self.grid.dim())
    }
}

/// Particle positions at one time, on the torus `[-L/2, L/2)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub dim: usize,
    /// `N × dim`, row-major.
    pub positions: Vec<f64>,
    pub time: f64,
    /// Boundary crossings so far.
    pub wraps: u64,
}

impl ParticleEnsemble {
    pub fn new(dim: usize, positions: Vec<f64>, time: f64) -> Result<Self> {
        if dim == 0 || positions.len() % dim != 0 || positions.len() / dim < 2 {
            return invalid("ensemble needs at least two particles of matching dimension");
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return invalid("particle positions must be finite");
        }
        Ok(Self { dim, positions, time, wraps: 0 })
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    /// Coordinate `axis` of every particle.
    pub fn coordinate(&self, axis: usize) -> Vec<f64> {
        self.positions.iter().skip(axis).step_by(self.dim).copied().collect()
    }

    pub fn mean(&self) -> Vec<f64> {
        (0..self.dim).map(|a| self.coordinate(a).iter().sum::<f64>() / self.len() as f64).collect()
    }

    /// Unbiased sample variance per coordinate.
    pub fn variance(&self) -> Vec<f64> {
        let mean = self.mean();
        (0..self.dim)
            .map(|a| {
                let c = self.coordinate(a);
                c.iter().map(|x| (x - mean[a]).powi(2)).sum::<f64>() / (c.len() - 1) as f64
            })
            .collect()
    }
}

/// Recorded ensembles at the checkpoints (time 0 first).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<ParticleEnsemble>,
}

impl Trajectory {
    pub fn last(&self) -> &ParticleEnsemble {
        self.snapshots.last().expect("a trajectory records at least the initial state")
    }

    pub fn at(&self, t: f64) -> Option<&ParticleEnsemble> {
        self.snapshots.iter().find(|s| (s.time - t).abs() <= 1e-9 * t.max(1.0))
    }
}

/// Independent generator for particle `i`: the master seed with stream `i`.
fn particle_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

/// Binned interaction drift `b_t(x_i, μ^N)` at every particle.
pub fn binned_drift<T: Real>(
    ens: &ParticleEnsemble,
    drift: &dyn Drift<T>,
    grid: &GridSpec<T>,
    t: f64,
    deconvolve: bool,
) -> Result<Vec<f64>> {
    let env = drift.envelope(t);
    if env == 0.0 || drift.is_zero() {
        return Ok(vec![0.0; ens.positions.len()]);
    }
    let mut rho = deposit_cic(ens, grid)?;
    if deconvolve {
        rho = sharpen(&rho);
    }
    let field = drift.base_field(&rho)?;
    let comps: Vec<ScalarField<T>> = (0..grid.dim())
        .map(|a| {
            let c = field.component_field(a);
            if deconvolve {
                sharpen(&c)
            } else {
                c
            }
        })
        .collect();
    let mut out = vec![0.0; ens.positions.len()];
    for (a, c) in comps.iter().enumerate() {
        let vals = interpolate_cic(c, ens);
        for (i, v) in vals.into_iter().enumerate() {
            out[i * ens.dim + a] = env * v;
        }
    }
    Ok(out)
}

fn wrap(x: f64, extent: f64) -> (f64, bool) {
    let half = extent / 2.0;
    if x >= -half && x < half {
        return (x, false);
    }
    let y = (x + half).rem_euclid(extent) - half;
    (if y >= half { -half } else { y }, true)
}

/// Draws `n` initial particles; particle `i` uses stream `i` of the master seed.
pub fn sample_initial<T: Real>(cfg: &SimConfig<T>, n: usize) -> Result<ParticleEnsemble> {
    cfg.validate()?;
    let dim = cfg.grid.dim();
    let extent = to_f64(cfg.grid.extent());
    let sampler = Sampler::new(&cfg.initial)?;
    let mut positions = vec![0.0; n * dim];
    let mut wraps = 0u64;
    for (i, p) in positions.chunks_mut(dim).enumerate() {
        sampler.draw(dim, &mut particle_rng(cfg.seed, i), p);
        for x in p.iter_mut() {
            let (y, w) = wrap(*x, extent);
            *x = y;
            wraps += w as u64;
        }
    }
    let mut ens = ParticleEnsemble::new(dim, positions, 0.0)?;
    ens.wraps = wraps;
    Ok(ens)
}

/// Euler–Maruyama for `dX^i = b_t(X^i, μ^N_t) dt + dW^i` with periodic wrap, from sampled
/// initial particles.
pub fn simulate_particles<T: Real>(cfg: &SimConfig<T>, n: usize, drift: &dyn Drift<T>) -> Result<Trajectory> {
    if n < 2 {
        return invalid("need at least two particles");
    }
    let initial = sample_initial(cfg, n)?;
    // Noise streams are offset so they never coincide with the streams used for sampling.
    let streams: Vec<u64> = (0..n as u64).map(|i| i + (1 << 32)).collect();
    simulate_from(cfg, initial, &streams, drift)
}

/// Euler–Maruyama from a given ensemble; particle `i` draws its noise from stream `streams[i]`.
pub fn simulate_from<T: Real>(
    cfg: &SimConfig<T>,
    initial: ParticleEnsemble,
    streams: &[u64],
    drift: &dyn Drift<T>,
) -> Result<Trajectory> {
    cfg.validate()?;
    let dim = cfg.grid.dim();
    if initial.dim != dim {
        return Err(Error::WrongDimension { expected: dim, got: initial.dim });
    }
    if streams.len() != initial.len() {
        return invalid("one noise stream per particle is required");
    }
    let extent = to_f64(cfg.grid.extent());
    let mut rngs: Vec<ChaCha8Rng> = streams.iter().map(|&s| particle_rng(cfg.seed, s as usize)).collect();
    let mut ens = initial;
    ens.time = 0.0;
    let steps = cfg.steps();
    let mut marks: Vec<usize> = cfg.checkpoints.iter().map(|c| (c / cfg.dt).round() as usize).collect();
    marks.push(steps);
    marks.sort_unstable();
    marks.dedup();
    let mut snapshots = vec![ens.clone()];
    let sd = cfg.dt.sqrt();
    for step in 0..steps {
        let t = step as f64 * cfg.dt;
        let b = binned_drift(&ens, drift, &cfg.grid, t, cfg.deconvolve)?;
        let new_wraps: u64 = ens
            .positions
            .par_chunks_mut(dim)
            .zip(rngs.par_iter_mut())
            .zip(b.par_chunks(dim))
            .map(|((p, rng), bi)| {
                let mut w = 0;
                for (x, bx) in p.iter_mut().zip(bi) {
                    let z: f64 = rng.sample(StandardNormal);
                    let (y, wrapped) = wrap(*x + bx * cfg.dt + sd * z, extent);
                    *x = y;
                    w += wrapped as u64;
                }
                w
            })
            .sum();
        ens.wraps += new_wraps;
        ens.time = (step + 1) as f64 * cfg.dt;
        if ens.positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { step: step + 1, time: ens.time });
        }
        if marks.binary_search(&(step + 1)).is_ok() {
            snapshots.push(ens.clone());
        }
    }
    if ens.wraps > 0 {
        log::info!("{} boundary wraps over the run", ens.wraps);
    }
    Ok(Trajectory { snapshots })
}
