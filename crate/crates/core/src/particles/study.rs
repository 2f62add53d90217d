use super::binning::empirical_density;
use super::sim::{simulate_particles, ParticleEnsemble, SimConfig};
use crate::error::{invalid, Result};
use crate::kernels::Drift;
use crate::metrics::{wasserstein_discrete, wasserstein_quantile, DiscreteMeasure, QuantileFunction};
use crate::scalar::{to_f64, Real};
use crate::sobolev::{linear_regression, PowerFit};
use crate::solver::MeasureFlow;
use crate::spectral::ScalarField;

/// One `(N, seed, t)` measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub seed: u64,
    pub t: f64,
    pub w1: f64,
    pub l1: f64,
}

/// Mean and standard deviation over seeds at one `(N, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudySummary {
    pub n: usize,
    pub t: f64,
    pub runs: usize,
    pub w1_mean: f64,
    pub w1_sd: f64,
    pub l1_mean: f64,
    pub l1_sd: f64,
}

impl StudySummary {
    /// Standard error of the W₁ mean.
    pub fn w1_stderr(&self) -> f64 {
        if self.runs > 1 {
            self.w1_sd / (self.runs as f64).sqrt()
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaosStudy {
    pub rows: Vec<StudyRow>,
    pub summary: Vec<StudySummary>,
    /// `(N, seed)` pairs whose simulation failed.
    pub failures: Vec<(usize, u64)>,
}

impl ChaosStudy {
    /// Summaries at time `t`, ordered by `N`.
    pub fn at_time(&self, t: f64) -> Vec<StudySummary> {
        let mut v: Vec<_> = self.summary.iter().filter(|s| (s.t - t).abs() < 1e-9).copied().collect();
        v.sort_by_key(|s| s.n);
        v
    }

    /// Log-log least-squares fit of the mean W₁ against `N` at time `t` (two or more sizes).
    pub fn rate_fit(&self, t: f64) -> Result<PowerFit> {
        let rows = self.at_time(t);
        if rows.iter().any(|s| !(s.w1_mean > 0.0)) {
            return invalid("rate fit needs positive W1 means");
        }
        let xs: Vec<f64> = rows.iter().map(|s| (s.n as f64).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|s| s.w1_mean.ln()).collect();
        let (slope, intercept, r_squared) = linear_regression(&xs, &ys)?;
        Ok(PowerFit { slope, intercept, r_squared })
    }
}

/// W₁ between the empirical measure and a grid density.
pub fn empirical_w1<T: Real>(ens: &ParticleEnsemble, rho: &ScalarField<T>) -> Result<f64> {
    if ens.dim == 1 {
        let pts = ens.coordinate(0);
        let w = vec![1.0 / pts.len() as f64; pts.len()];
        let a = QuantileFunction::from_atoms(&pts, &w)?;
        let b = QuantileFunction::from_density(rho)?;
        wasserstein_quantile(&a, &b, 1.0)
    } else {
        let a = DiscreteMeasure::empirical(ens.dim, ens.positions.clone())?;
        let block = (rho.grid().points_per_dim() / 16).max(1);
        let b = DiscreteMeasure::from_density(rho, block, 1e-12)?;
        wasserstein_discrete(&a, &b, 1.0)
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// For each `N`, runs `replicates` seeds (`cfg.seed + r`) and compares the ensembles with
/// `pde_flow` at its output times that fall on the particle time grid.
pub fn chaos_convergence_study<T: Real>(
    cfg: &SimConfig<T>,
    drift: &dyn Drift<T>,
    n_list: &[usize],
    replicates: usize,
    pde_flow: &MeasureFlow<T>,
    bandwidth: f64,
) -> Result<ChaosStudy> {
    if replicates == 0 || n_list.is_empty() {
        return invalid("study needs at least one N and one replicate");
    }
    let pde_end = pde_flow.times.last().copied().unwrap_or(0.0);
    if (pde_end - cfg.horizon).abs() > 1e-9 * cfg.horizon.max(1.0) {
        return invalid(format!("PDE horizon {pde_end} differs from the particle horizon {}", cfg.horizon));
    }
    let checkpoints: Vec<f64> = pde_flow
        .times
        .iter()
        .copied()
        .filter(|t| {
            let k = t / cfg.dt;
            (k - k.round()).abs() < 1e-6
        })
        .collect();
    let mut run_cfg = cfg.clone();
    run_cfg.checkpoints = checkpoints.clone();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &n in n_list {
        for r in 0..replicates as u64 {
            run_cfg.seed = cfg.seed.wrapping_add(r);
            let traj = match simulate_particles(&run_cfg, n, drift) {
                Ok(t) => t,
                Err(e) => {
                    log::warn!("N = {n}, seed = {}: {e}", run_cfg.seed);
                    failures.push((n, run_cfg.seed));
                    continue;
                }
            };
            for &t in &checkpoints {
                let ens = traj.at(t).expect("checkpoint recorded");
                let rho = pde_flow.at(t).expect("time taken from the flow");
                let w1 = empirical_w1(ens, rho)?;
                let kde = empirical_density(ens, rho.grid(), bandwidth)?;
                let l1 = to_f64(kde.sub(rho)?.l1_norm());
                rows.push(StudyRow { n, seed: run_cfg.seed, t, w1, l1 });
            }
        }
    }
    let mut summary = Vec::new();
    for &n in n_list {
        for &t in &checkpoints {
            let sel: Vec<&StudyRow> = rows.iter().filter(|r| r.n == n && r.t == t).collect();
            if sel.is_empty() {
                continue;
            }
            let (w1_mean, w1_sd) = mean_sd(&sel.iter().map(|r| r.w1).collect::<Vec<_>>());
            let (l1_mean, l1_sd) = mean_sd(&sel.iter().map(|r| r.l1).collect::<Vec<_>>());
            summary.push(StudySummary { n, t, runs: sel.len(), w1_mean, w1_sd, l1_mean, l1_sd });
        }
    }
    Ok(ChaosStudy { rows, summary, failures })
}

/// KDE densities of a trajectory's snapshots after time 0, as a flow (for the binary dump).
pub fn trajectory_flow<T: Real>(
    traj: &super::sim::Trajectory,
    grid: &crate::spectral::GridSpec<T>,
    bandwidth: f64,
) -> Result<MeasureFlow<T>> {
    let first = &traj.snapshots[0];
    let initial = empirical_density(first, grid, bandwidth)?;
    let rest = &traj.snapshots[1..];
    let densities = rest.iter().map(|e| empirical_density(e, grid, bandwidth)).collect::<Result<Vec<_>>>()?;
    MeasureFlow::new(rest.iter().map(|e| e.time).collect(), densities, initial)
}
