use rayon::prelude::*;

use super::etd::{FrozenDrift, Propagator, RepairControl, RepairStats, StepControl};
use super::flow::MeasureFlow;
use super::params::{eta_theta_params, tau_n_formula, Admissibility, FlowParams};
use crate::error::{invalid, Error, Result};
use crate::kernels::Drift;
use crate::scalar::{cst, to_f64, Real};
use crate::sobolev::{linear_regression, measure_dual_norm, BallLattice, DualMethod, SobolevIndex};
use crate::spectral::{heat_apply, ScalarField, VectorField};

/// Numerical controls of [`picard_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Largest substep of the time integrator.
    pub max_step: f64,
    /// Grading exponent of the first interval; `None` grades (exponent 2) only when `κ < η/2`.
    pub grading: Option<f64>,
    pub min_first_substeps: usize,
    /// Stop once the weighted distance between iterates drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Double `λ` (up to `lambda_cap`) while the contraction ratio is at least `contraction_target`.
    pub auto_lambda: bool,
    pub lambda_cap: f64,
    pub contraction_target: f64,
    /// Consecutive ratios `≥ 1` that abort the iteration.
    pub divergence_streak: usize,
    /// Decay values above this mark a blowup.
    pub blowup_cap: f64,
    pub clip_floor: f64,
    pub negative_mass_limit: f64,
    /// Constant `A_n` of the lifetime bound.
    pub a_n: f64,
    /// Exponent `θ'` of `s_t(θ', γ)`; defaults to `θ`.
    pub theta_prime: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_step: 5e-3,
            grading: None,
            min_first_substeps: 16,
            tolerance: 1e-6,
            max_iterations: 30,
            auto_lambda: false,
            lambda_cap: 1024.0,
            contraction_target: 0.9,
            divergence_streak: 3,
            blowup_cap: 1e8,
            clip_floor: 1e-6,
            negative_mass_limit: 1e-3,
            a_n: 1.0,
            theta_prime: None,
        }
    }
}

impl SolverOptions {
    fn step_control(&self, params: &FlowParams, origin: f64) -> StepControl {
        let auto = if params.kappa < params.eta() / 2.0 { 2.0 } else { 1.0 };
        StepControl {
            max_step: self.max_step,
            first_grading: self.grading.unwrap_or(auto),
            min_first_substeps: self.min_first_substeps,
            origin,
        }
    }

    fn repair_control(&self) -> RepairControl {
        RepairControl { clip_floor: self.clip_floor, negative_mass_limit: self.negative_mass_limit }
    }

    fn validate(&self) -> Result<()> {
        if !(self.max_step > 0.0) || !(self.tolerance > 0.0) || self.max_iterations == 0 {
            return invalid("solver options need max_step > 0, tolerance > 0 and max_iterations >= 1");
        }
        if !(self.contraction_target > 0.0 && self.contraction_target < 1.0) {
            return invalid("contraction target must lie in (0, 1)");
        }
        Ok(())
    }
}

/// Diagnostics of a Picard solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Applications of the solution map.
    pub iterations: usize,
    pub converged: bool,
    /// Weighted distance between the last two iterates (0 for state-independent drifts).
    pub residual: f64,
    /// `ρ^{λ,T}(μ^{(j)}, μ^{(j-1)})` at the final `λ`.
    pub distances: Vec<f64>,
    /// Ratios of consecutive distances at the final `λ`.
    pub contraction_ratios: Vec<f64>,
    pub lambda: f64,
    /// `(t, t^{η/2} ‖μ_t‖_{δ,k*})` along the output times.
    pub decay_trajectory: Vec<(f64, f64)>,
    /// `max_t t^{η/2}‖μ_t‖ e^{-λ_env t}`.
    pub fitted_b: f64,
    /// Growth rate `λ_env ≥ 0` of the decay trajectory.
    pub envelope_rate: f64,
    /// First output time where the decay value exceeds the blowup cap.
    pub blowup_time: Option<f64>,
    /// `‖γ‖_{ε,p*}`, when the amalgam bound supports `p`.
    pub gamma_norm: Option<f64>,
    /// `k_T(γ)`.
    pub k_t: f64,
    /// `s_T(θ', γ)`.
    pub s_t: f64,
    pub tau_n: Option<f64>,
    pub admissibility: Admissibility,
    pub repair: RepairStats,
}

fn dual_norm<T: Real>(f: &ScalarField<T>, idx: SobolevIndex, lat: &BallLattice) -> Result<f64> {
    Ok(to_f64(measure_dual_norm(f, idx, lat, DualMethod::Amalgam)?))
}

/// Per-time dual norms `‖μ_t - ν_t‖_{δ,k*}`.
pub fn flow_distance_norms<T: Real>(mu: &MeasureFlow<T>, nu: &MeasureFlow<T>, params: &FlowParams) -> Result<Vec<f64>> {
    if mu.times != nu.times {
        return invalid("flows must share their output times");
    }
    let lat = BallLattice::new(mu.grid())?;
    let idx = params.flow_index();
    mu.densities
        .par_iter()
        .zip(&nu.densities)
        .map(|(a, b)| dual_norm(&a.sub(b)?, idx, &lat))
        .collect()
}

fn weighted_sup(times: &[f64], norms: &[f64], eta: f64, lambda: f64) -> f64 {
    times
        .iter()
        .zip(norms)
        .map(|(&t, &n)| (-lambda * t).exp() * t.powf(eta / 2.0) * n)
        .fold(0.0, f64::max)
}

/// `ρ^{λ,T}(μ, ν) = sup_t e^{-λt} t^{η/2} ‖μ_t - ν_t‖_{δ,k*}` over the output times.
pub fn weighted_flow_distance<T: Real>(mu: &MeasureFlow<T>, nu: &MeasureFlow<T>, params: &FlowParams) -> Result<f64> {
    let norms = flow_distance_norms(mu, nu, params)?;
    Ok(weighted_sup(&mu.times, &norms, params.eta(), params.lambda))
}

/// Heat flow `P_t γ` at the output times: the first Picard iterate.
pub fn heat_flow<T: Real>(gamma: &ScalarField<T>, times: &[f64]) -> Result<MeasureFlow<T>> {
    let densities = times.par_iter().map(|&t| heat_apply(gamma, cst(t))).collect::<Result<Vec<_>>>()?;
    MeasureFlow::new(times.to_vec(), densities, gamma.clone())
}

fn check_inputs<T: Real>(gamma: &ScalarField<T>, params: &FlowParams) -> Result<()> {
    if gamma.grid().dim() != params.dim {
        return Err(Error::WrongDimension { expected: params.dim, got: gamma.grid().dim() });
    }
    let mass = to_f64(gamma.integral());
    if (mass - 1.0).abs() > 1e-6 {
        return invalid(format!("initial law must have unit mass, got {mass}"));
    }
    if gamma.values().iter().any(|v| *v < T::zero()) {
        return invalid("initial law must be nonnegative");
    }
    Ok(())
}

/// One application of the solution map: solves the linear equation driven by `b_t(·, μ_t)`
/// from `γ`. The drift is evaluated on `μ` at `0` (as `γ`) and at the output times, and
/// interpolated linearly in between.
pub fn phi_apply<T: Real>(
    gamma: &ScalarField<T>,
    mu: &MeasureFlow<T>,
    drift: &dyn Drift<T>,
    params: &FlowParams,
    opts: &SolverOptions,
) -> Result<(MeasureFlow<T>, RepairStats)> {
    phi_apply_from(gamma, mu, drift, params, opts, 0.0)
}

fn phi_apply_from<T: Real>(
    gamma: &ScalarField<T>,
    mu: &MeasureFlow<T>,
    drift: &dyn Drift<T>,
    params: &FlowParams,
    opts: &SolverOptions,
    origin: f64,
) -> Result<(MeasureFlow<T>, RepairStats)> {
    opts.validate()?;
    check_inputs(gamma, params)?;
    if mu.times != params.time_grid {
        return invalid("flow times must equal the parameter time grid");
    }
    let grid = *gamma.grid();
    let mut nodes = vec![0.0];
    nodes.extend_from_slice(&params.time_grid);
    let fields: Vec<VectorField<T>> = if drift.is_zero() {
        Vec::new()
    } else if drift.is_state_independent() {
        let f = drift.base_field(gamma)?;
        vec![f; nodes.len()]
    } else {
        std::iter::once(gamma)
            .chain(&mu.densities)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|rho| drift.base_field(rho))
            .collect::<Result<Vec<_>>>()?
    };
    let envelope = |s: f64| drift.envelope(s);
    let path = FrozenDrift { nodes: &nodes, fields: &fields, envelope: &envelope };
    let prop = Propagator::new(&grid);
    let (values, stats) =
        prop.evolve(gamma.values(), &params.time_grid, &path, &opts.step_control(params, origin), &opts.repair_control())?;
    let densities = values.into_iter().map(|v| ScalarField::new(grid, v)).collect::<Result<Vec<_>>>()?;
    Ok((MeasureFlow::new(params.time_grid.clone(), densities, gamma.clone())?, stats))
}

/// Picard iteration `μ^{(j+1)} = Φ(μ^{(j)})` from the heat flow of `γ`.
pub fn picard_solve<T: Real>(
    gamma: &ScalarField<T>,
    drift: &dyn Drift<T>,
    params: &FlowParams,
    opts: &SolverOptions,
) -> Result<(MeasureFlow<T>, SolveReport)> {
    picard_solve_from(gamma, drift, params, opts, 0.0)
}

fn picard_solve_from<T: Real>(
    gamma: &ScalarField<T>,
    drift: &dyn Drift<T>,
    params: &FlowParams,
    opts: &SolverOptions,
    origin: f64,
) -> Result<(MeasureFlow<T>, SolveReport)> {
    opts.validate()?;
    check_inputs(gamma, params)?;
    let adm = eta_theta_params(params, None);
    if let Some(msg) = adm.solver_violation(params.kappa) {
        return invalid(msg);
    }
    let eta = adm.eta;
    let times = &params.time_grid;
    let mut current = heat_flow(gamma, times)?;
    let mut repair = RepairStats::default();
    let mut history: Vec<Vec<f64>> = Vec::new();
    let mut lambda = params.lambda;
    let mut iterations = 0;
    let mut converged = false;

    if drift.is_state_independent() {
        let (next, stats) = phi_apply_from(gamma, &current, drift, params, opts, origin)?;
        current = next;
        repair = stats;
        iterations = 1;
        converged = true;
    } else {
        let mut streak = 0;
        while iterations < opts.max_iterations {
            let (next, stats) = phi_apply_from(gamma, &current, drift, params, opts, origin)?;
            iterations += 1;
            merge(&mut repair, &stats);
            history.push(flow_distance_norms(&next, &current, params)?);
            current = next;
            let d = weighted_sup(times, history.last().expect("pushed"), eta, lambda);
            log::debug!("picard iteration {iterations}: distance {d:e} at lambda {lambda}");
            if history.len() >= 2 {
                let mut ratio = ratio_at(&history, times, eta, lambda);
                while opts.auto_lambda && ratio >= opts.contraction_target && lambda < opts.lambda_cap {
                    lambda = (2.0 * lambda).max(1.0).min(opts.lambda_cap);
                    ratio = ratio_at(&history, times, eta, lambda);
                    log::info!("raising lambda to {lambda}: contraction ratio {ratio}");
                }
                streak = if ratio >= 1.0 { streak + 1 } else { 0 };
                if streak >= opts.divergence_streak {
                    return Err(Error::NoContraction { streak, last_ratio: ratio });
                }
            }
            let d = weighted_sup(times, history.last().expect("pushed"), eta, lambda);
            if !d.is_finite() {
                return Err(Error::NonFinite { step: iterations, time: params.horizon });
            }
            if d < opts.tolerance {
                converged = true;
                break;
            }
        }
        if !converged {
            log::warn!("picard iteration stopped after {iterations} iterations without reaching tolerance");
        }
    }

    let distances: Vec<f64> = history.iter().map(|n| weighted_sup(times, n, eta, lambda)).collect();
    let contraction_ratios = distances.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 }).collect();
    let residual = distances.last().copied().unwrap_or(0.0);
    let report = summarize(gamma, &current, params, opts, adm, SolveCore {
        iterations,
        converged,
        residual,
        distances,
        contraction_ratios,
        lambda,
        repair,
    })?;
    Ok((current, report))
}

fn ratio_at(history: &[Vec<f64>], times: &[f64], eta: f64, lambda: f64) -> f64 {
    let n = history.len();
    let prev = weighted_sup(times, &history[n - 2], eta, lambda);
    let last = weighted_sup(times, &history[n - 1], eta, lambda);
    if prev > 0.0 {
        last / prev
    } else {
        0.0
    }
}

fn merge(total: &mut RepairStats, s: &RepairStats) {
    total.clipped_mass += s.clipped_mass;
    total.max_mass_drift = total.max_mass_drift.max(s.max_mass_drift);
    total.max_negative_mass = total.max_negative_mass.max(s.max_negative_mass);
    total.steps += s.steps;
}

struct SolveCore {
    iterations: usize,
    converged: bool,
    residual: f64,
    distances: Vec<f64>,
    contraction_ratios: Vec<f64>,
    lambda: f64,
    repair: RepairStats,
}

/// `(t, t^{η/2} ‖μ_t‖_{δ,k*})` along a flow.
pub fn decay_trajectory<T: Real>(flow: &MeasureFlow<T>, params: &FlowParams) -> Result<Vec<(f64, f64)>> {
    let lat = BallLattice::new(flow.grid())?;
    let idx = params.flow_index();
    let eta = params.eta();
    flow.times
        .par_iter()
        .zip(&flow.densities)
        .map(|(&t, rho)| Ok((t, t.powf(eta / 2.0) * dual_norm(rho, idx, &lat)?)))
        .collect()
}

/// Smallest `B` with `t^{η/2}‖μ_t‖ ≤ B e^{λ_env t}`, where `λ_env ≥ 0` is the fitted log-slope.
pub fn fit_envelope(traj: &[(f64, f64)]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = traj.iter().filter(|p| p.1 > 0.0 && p.1.is_finite()).copied().collect();
    let rate = if pts.len() >= 2 {
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
        linear_regression(&xs, &ys).map(|(slope, _, _)| slope.max(0.0)).unwrap_or(0.0)
    } else {
        0.0
    };
    let b = traj.iter().map(|&(t, v)| v * (-rate * t).exp()).fold(0.0, f64::max);
    (b, rate)
}

fn summarize<T: Real>(
    gamma: &ScalarField<T>,
    flow: &MeasureFlow<T>,
    params: &FlowParams,
    opts: &SolverOptions,
    adm: Admissibility,
    core: SolveCore,
) -> Result<SolveReport> {
    let decay = decay_trajectory(flow, params)?;
    let (fitted_b, envelope_rate) = fit_envelope(&decay);
    let blowup_time = decay.iter().find(|p| !(p.1 <= opts.blowup_cap)).map(|p| p.0);
    let lat = BallLattice::new(gamma.grid())?;
    let gamma_norm = match dual_norm(gamma, params.initial_index(), &lat) {
        Ok(v) => Some(v),
        Err(Error::Unsupported(msg)) => {
            log::warn!("no norm of the initial law: {msg}");
            None
        }
        Err(e) => return Err(e),
    };
    let sup_decay = decay.iter().map(|p| p.1).fold(0.0, f64::max);
    let k_t = gamma_norm.unwrap_or(0.0).max(sup_decay);
    let theta_prime = opts.theta_prime.unwrap_or(adm.theta);
    let s_t = if k_t > 0.0 { params.horizon.min(k_t.powf(-theta_prime)) } else { params.horizon };
    let n = params.horizon.ceil().max(1.0) as u32;
    let tau_n = gamma_norm.and_then(|g| tau_n_formula(g, n, opts.a_n, params).ok());
    Ok(SolveReport {
        iterations: core.iterations,
        converged: core.converged,
        residual: core.residual,
        distances: core.distances,
        contraction_ratios: core.contraction_ratios,
        lambda: core.lambda,
        decay_trajectory: decay,
        fitted_b,
        envelope_rate,
        blowup_time,
        gamma_norm,
        k_t,
        s_t,
        tau_n,
        admissibility: adm,
        repair: core.repair,
    })
}

/// Drift switched off on `[0, r)` and shifted by `r` afterwards.
struct ShiftedDrift<'a, T: Real> {
    inner: &'a dyn Drift<T>,
    shift: f64,
}

impl<T: Real> Drift<T> for ShiftedDrift<'_, T> {
    fn envelope(&self, t: f64) -> f64 {
        if t < self.shift {
            0.0
        } else {
            self.inner.envelope(t - self.shift)
        }
    }

    fn base_field(&self, rho: &ScalarField<T>) -> Result<VectorField<T>> {
        self.inner.base_field(rho)
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    fn is_state_independent(&self) -> bool {
        self.inner.is_state_independent()
    }
}

/// Solves from a rough `γ_0` by running heat alone on `[0, r]` and the drift shifted by `r`
/// afterwards. Returns the flow relabeled to start at `r` (so its initial density is `P_r γ_0`).
pub fn time_shift_solve<T: Real>(
    gamma0: &ScalarField<T>,
    drift: &dyn Drift<T>,
    params: &FlowParams,
    r: f64,
    opts: &SolverOptions,
) -> Result<(MeasureFlow<T>, SolveReport)> {
    let grid = gamma0.grid();
    if !(r > 0.0) || !r.is_finite() || !grid.resolves_heat_time(cst(r)) {
        return invalid(format!("shift r = {r} is not resolved by the grid (spacing {})", grid.spacing()));
    }
    let mut shifted_times = vec![r];
    shifted_times.extend(params.time_grid.iter().map(|t| t + r));
    let shifted_params = params.with_time_grid(shifted_times)?;
    let shifted = ShiftedDrift { inner: drift, shift: r };
    let (flow, report) = picard_solve_from(gamma0, &shifted, &shifted_params, opts, r)?;
    let mut densities = flow.densities;
    let initial = densities.remove(0);
    let relabeled = MeasureFlow::new(params.time_grid.clone(), densities, initial)?;
    Ok((relabeled, report))
}
