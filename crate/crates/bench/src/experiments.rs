//! The experiments behind `mvflow experiment <name>`.

use std::time::{SystemTime, UNIX_EPOCH};

use mvflow_core::kernels::{
    default_mollification, geometric_eps, kernel_norm_study, PreparedKernel, Verdict, ZeroDrift,
};
use mvflow_core::metrics::{
    relative_entropy, total_variation, transport_cost_enumerate, wasserstein_1d, wasserstein_discrete,
    DiscreteMeasure, GaussianSpec,
};
use mvflow_core::particles::{chaos_convergence_study, InitialSampler, SimConfig};
use mvflow_core::sobolev::{
    dual_bracket, heat_operator_exponent, measure_dual_norm, operator_exponent_probe, BallLattice,
    DualMethod, ProbeConfig,
};
use mvflow_core::solver::{
    heat_flow, picard_solve, small_singular_instance, time_shift_solve, FlowParams, MeasureFlow, SolveReport,
    SolverOptions,
};
use mvflow_core::spectral::bessel_apply;
use mvflow_core::{BesselMode, Drift, GridSpec, KernelSpec, KernelVariant, ScalarField, SobolevIndex, TimeModulation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use mvflow_core::sobolev::{fit_exponent, PowerFit};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{BenchError, Result};
use crate::report::{Provenance, ReportRow, RunReport, Series};

/// Grid points and side length used when the config leaves them at 0.
pub fn default_grid(kind: ExperimentKind) -> (usize, f64) {
    match kind {
        ExperimentKind::HeatExponent => (2048, 16.0),
        ExperimentKind::KernelMembership => (8192, 16.0),
        ExperimentKind::Solve => (512, 8.0),
        ExperimentKind::Decay | ExperimentKind::Stability | ExperimentKind::EntropyCost => (2048, 16.0),
        ExperimentKind::Particles => (512, 16.0),
        ExperimentKind::BesselIdentity => (512, 8.0),
        ExperimentKind::MetricsOracles => (4096, 16.0),
    }
}

/// `(t_min, t_max, count)` used when the config leaves the window at 0.
fn default_window(kind: ExperimentKind) -> (f64, f64, usize) {
    match kind {
        ExperimentKind::HeatExponent => (0.01, 1.0, 10),
        ExperimentKind::Stability => (0.02, 0.5, 12),
        _ => (0.05, 0.5, 10),
    }
}

fn default_variance(kind: ExperimentKind) -> f64 {
    match kind {
        ExperimentKind::Stability => 1e-3,
        ExperimentKind::Particles => 0.1,
        _ => 0.05,
    }
}

pub fn grid_for(cfg: &ExperimentConfig) -> Result<GridSpec<f64>> {
    let (n, l) = default_grid(cfg.experiment);
    let n = if cfg.grid > 0 { cfg.grid } else { n };
    let l = if cfg.extent > 0.0 { cfg.extent } else { l };
    Ok(GridSpec::new(cfg.dim, n, l)?)
}

fn window(cfg: &ExperimentConfig) -> (f64, f64, usize) {
    let (a, b, c) = default_window(cfg.experiment);
    (
        if cfg.t_min > 0.0 { cfg.t_min } else { a },
        if cfg.t_max > 0.0 { cfg.t_max } else { b },
        if cfg.t_count > 0 { cfg.t_count } else { c },
    )
}

fn variance(cfg: &ExperimentConfig) -> f64 {
    if cfg.r > 0.0 {
        cfg.r
    } else {
        default_variance(cfg.experiment)
    }
}

pub fn provenance(cfg: &ExperimentConfig, grid: &GridSpec<f64>) -> Provenance {
    Provenance {
        experiment: cfg.experiment.name().into(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        grid: format!("d={} n={} L={}", grid.dim(), grid.points_per_dim(), grid.extent()),
        version: env!("CARGO_PKG_VERSION").into(),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    }
}

fn gaussian(grid: GridSpec<f64>, mean: f64, var: f64) -> Result<ScalarField<f64>> {
    Ok(ScalarField::gaussian(grid, [mean, 0.0], var)?)
}

/// A catalog kernel ready for the solver, with the flow indices it is run under.
pub struct PreparedDrift {
    pub drift: Box<dyn Drift<f64>>,
    pub spec: Option<KernelSpec<f64>>,
    pub params: FlowParams,
    /// `(amplitude, Lip · T)` of the calibrated instance.
    pub calibration: Option<(f64, f64)>,
}

/// The catalog kernel named in the config (`None` for `zero`); `small` is handled by [`prepare_drift`].
pub fn catalog_spec(cfg: &ExperimentConfig, grid: &GridSpec<f64>, modulation: TimeModulation) -> Result<Option<KernelSpec<f64>>> {
    let d = cfg.dim;
    let moll = if cfg.mollification > 0.0 { cfg.mollification } else { default_mollification(grid) };
    let a = cfg.amplitude;
    let (variant, moll) = match cfg.kernel.as_str() {
        "zero" => return Ok(None),
        "constant" => (KernelVariant::ConstantVector(vec![a; d]), 0.0),
        "dirac" => (KernelVariant::DiracDerivative { order: 0, direction: vec![1.0; d] }, moll),
        "riesz_half" => (KernelVariant::RieszOrder { c: vec![a; d], n0: 0, eps0: 0.5 }, moll),
        "riesz_three_half" => (KernelVariant::RieszOrder { c: vec![a; d], n0: 1, eps0: 0.5 }, moll),
        "small" => {
            return Err(BenchError::Config("the calibrated small kernel is not a plain catalog spec".into()));
        }
        other => return Err(BenchError::Config(format!("unknown kernel '{other}'"))),
    };
    Ok(Some(KernelSpec::new(variant, moll, modulation)?))
}

pub fn prepare_drift(cfg: &ExperimentConfig, grid: &GridSpec<f64>, times: Vec<f64>) -> Result<PreparedDrift> {
    if cfg.kernel == "small" {
        let inst = small_singular_instance(grid, cfg.horizon, cfg.time_count.max(1))?;
        let kernel = PreparedKernel::new(&inst.spec, grid)?;
        let params = inst.params.with_time_grid(times)?.with_lambda(cfg.lambda);
        return Ok(PreparedDrift {
            drift: Box::new(kernel),
            spec: Some(inst.spec),
            params,
            calibration: Some((inst.amplitude, inst.lipschitz * cfg.horizon)),
        });
    }
    let params = cfg.flow_params(times)?;
    let spec = catalog_spec(cfg, grid, TimeModulation::power(cfg.kappa)?)?;
    let drift: Box<dyn Drift<f64>> = match &spec {
        None => Box::new(ZeroDrift),
        Some(s) => Box::new(PreparedKernel::new(s, grid)?),
    };
    Ok(PreparedDrift { drift, spec, params, calibration: None })
}

fn solver_options(cfg: &ExperimentConfig) -> SolverOptions {
    SolverOptions { max_iterations: cfg.max_iterations, ..Default::default() }
}

/// Flow from `gamma` under the prepared drift; the heat flow when the drift vanishes.
fn flow_from(gamma: &ScalarField<f64>, pd: &PreparedDrift, opts: &SolverOptions) -> Result<MeasureFlow<f64>> {
    if pd.drift.is_zero() {
        return Ok(heat_flow(gamma, &pd.params.time_grid)?);
    }
    Ok(picard_solve(gamma, pd.drift.as_ref(), &pd.params, opts)?.0)
}

/// Validates the config, runs the experiment and returns its report.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::HeatExponent => heat_exponent(cfg),
        ExperimentKind::KernelMembership => kernel_membership(cfg),
        ExperimentKind::Solve => solve_with_flow(cfg).map(|(_, r)| r),
        ExperimentKind::Decay => decay(cfg),
        ExperimentKind::Stability => stability(cfg),
        ExperimentKind::EntropyCost => entropy_cost(cfg),
        ExperimentKind::Particles => particles(cfg),
        ExperimentKind::BesselIdentity => bessel_identity(cfg),
        ExperimentKind::MetricsOracles => metrics_oracles(cfg),
    }
}

pub fn heat_exponent(cfg: &ExperimentConfig) -> Result<RunReport> {
    let grid = grid_for(cfg)?;
    let (t0, t1, n) = window(cfg);
    let ts = FlowParams::geometric_times(t0, t1, n);
    let from = SobolevIndex::new(cfg.delta, cfg.k.0)?;
    let to = SobolevIndex::new(cfg.eps, cfg.p.0)?;
    let theory = heat_operator_exponent(cfg.dim, cfg.order, from, to);
    let probe = operator_exponent_probe(&grid, cfg.order, from, to, &ts, cfg.probes, cfg.seed)?;
    let mut rep = RunReport::new(provenance(cfg, &grid));
    rep.push(ReportRow::within("slope", theory, probe.fit.slope, cfg.tol_heat_slope));
    rep.push(ReportRow::reported("constant", None, probe.constant));
    rep.push(ReportRow::reported("r_squared", None, probe.fit.r_squared));
    // Slope over the first decade only, where the Bessel symbol has not yet saturated.
    let early: Vec<(f64, f64)> = probe.rows.iter().filter(|r| r.t <= 10.0 * t0).map(|r| (r.t, r.norm_estimate)).collect();
    if early.len() >= 4 {
        rep.push(ReportRow::reported("slope_first_decade", Some(theory), fit_exponent(&early)?.slope));
    }
    rep.series.push(Series::new(
        "operator_norm",
        "t",
        "norm",
        probe.rows.iter().map(|r| (r.t, r.norm_estimate)).collect(),
    ));
    Ok(rep)
}

/// Order `s` of the kernel's singularity (`|h| ~ |z|^{-(d+s)}` after one derivative), or `None` when bounded.
fn singular_order(spec: &KernelSpec<f64>) -> Option<f64> {
    match &spec.variant {
        KernelVariant::DiracDerivative { order, .. } => Some(*order as f64),
        KernelVariant::RieszOrder { n0, eps0, .. } => Some(2.0 * *n0 as f64 + eps0 - 1.0),
        _ => None,
    }
}

/// Predicted behaviour of `ε ↦ ‖P_ε h‖_{W̃^{-δ,k}}`: bounded, or growing like `ε^{-g}`.
///
/// With `a = d + s - δ` the lifted kernel behaves like `|z|^{-a}` near 0, which is locally `L^k`
/// iff `a < d/k`; otherwise the mollified norm grows with exponent `(a - d/k)/2`.
pub fn membership_theory(spec: &KernelSpec<f64>, idx: SobolevIndex, d: usize) -> (Verdict, Option<f64>) {
    let Some(s) = singular_order(spec) else {
        return (Verdict::Bounded, None);
    };
    let a = d as f64 + s - idx.delta;
    let critical = d as f64 * idx.k.reciprocal();
    if a < critical {
        (Verdict::Bounded, None)
    } else {
        (Verdict::Unbounded, Some((a - critical) / 2.0))
    }
}

pub fn kernel_membership(cfg: &ExperimentConfig) -> Result<RunReport> {
    let grid = grid_for(cfg)?;
    let spec = catalog_spec(cfg, &grid, TimeModulation::power(0.0)?)?
        .ok_or_else(|| BenchError::Config("kernel_membership needs a nonzero catalog kernel".into()))?;
    let idx = SobolevIndex::new(cfg.delta, cfg.k.0)?;
    let eps = geometric_eps(cfg.eps_max, cfg.eps_min, cfg.eps_count);
    let study = kernel_norm_study(&spec.with_mollification(cfg.eps_max)?, &grid, idx, &eps)?;
    let (verdict, growth) = membership_theory(&spec, idx, cfg.dim);
    let flag = |v: Verdict| if v == Verdict::Bounded { 1.0 } else { 0.0 };
    let mut rep = RunReport::new(provenance(cfg, &grid));
    rep.push(ReportRow::within("bounded", flag(verdict), flag(study.verdict), 0.0));
    if let Some(g) = growth {
        rep.push(ReportRow::within("growth_exponent", g, study.growth_exponent().unwrap_or(f64::NAN), cfg.tol_growth));
    }
    rep.push(ReportRow::reported("bounded_fit_limit", None, study.bounded_fit.offset));
    if !study.truncated.is_empty() {
        rep.notes.push(format!("{} eps values dropped as unresolved on the grid", study.truncated.len()));
    }
    rep.series.push(Series::new("kernel_norm", "eps", "norm", study.rows.iter().map(|r| (r.eps, r.norm)).collect()));
    Ok(rep)
}

/// Dual-norm bracket of `N(0, r) - N(h, r)` for each separation.
pub fn norm_report(cfg: &ExperimentConfig) -> Result<RunReport> {
    let grid = grid_for(cfg)?;
    let lat = BallLattice::new(&grid)?;
    let idx = SobolevIndex::new(cfg.delta, cfg.k.0)?;
    let r = variance(cfg);
    let mut prov = provenance(cfg, &grid);
    prov.experiment = "norm".into();
    let mut rep = RunReport::new(prov);
    let a = ScalarField::gaussian(grid, [0.0, 0.0], r)?;
    for &h in &cfg.separations {
        let b = ScalarField::gaussian(grid, [h, 0.0], r)?;
        let br = dual_bracket(&a.sub(&b)?, idx, &lat, ProbeConfig { seed: cfg.seed, ..ProbeConfig::default() })?;
        rep.push(ReportRow::reported(format!("upper_h={h}"), None, br.upper));
        rep.push(ReportRow::reported(format!("lower_h={h}"), None, br.lower));
        rep.push(ReportRow::at_most(format!("lower_minus_upper_h={h}"), Some(0.0), br.lower - br.upper, 0.0));
    }
    Ok(rep)
}

fn solve_rows(rep: &mut RunReport, sr: &SolveReport) {
    rep.push(ReportRow::reported("envelope_rate", None, sr.envelope_rate));
    rep.push(ReportRow::reported("fitted_b", None, sr.fitted_b));
    rep.push(ReportRow::reported("k_t", None, sr.k_t));
    rep.push(ReportRow::reported("s_t", None, sr.s_t));
    if let Some(g) = sr.gamma_norm {
        rep.push(ReportRow::reported("gamma_norm", None, g));
    }
    if let Some(tau) = sr.tau_n {
        rep.push(ReportRow::reported("tau_n", None, tau));
    }
    rep.push(ReportRow::reported("clipped_mass", None, sr.repair.clipped_mass));
    rep.series.push(Series::new("decay_trajectory", "t", "t^(eta/2) norm", sr.decay_trajectory.clone()));
}

fn sup_diff(a: &ScalarField<f64>, b: &ScalarField<f64>) -> Result<f64> {
    Ok(a.sub(b)?.sup_norm())
}

/// The `solve` experiment; also returns the computed flow.
pub fn solve_with_flow(cfg: &ExperimentConfig) -> Result<(MeasureFlow<f64>, RunReport)> {
    cfg.validate()?;
    let grid = grid_for(cfg)?;
    let times = FlowParams::uniform_times(cfg.horizon, cfg.time_count);
    let pd = prepare_drift(cfg, &grid, times)?;
    let r = variance(cfg);
    let gamma = gaussian(grid, 0.0, r)?;
    let opts = solver_options(cfg);
    let mut rep = RunReport::new(provenance(cfg, &grid));
    let (flow, sr) = picard_solve(&gamma, pd.drift.as_ref(), &pd.params, &opts)?;
    rep.push(ReportRow::reported("iterations_used", None, sr.iterations as f64));

    match cfg.kernel.as_str() {
        "zero" | "constant" => {
            let (exact_of, tol): (Box<dyn Fn(f64) -> Result<ScalarField<f64>>>, f64) = if cfg.kernel == "zero" {
                (Box::new(|t| gaussian(grid, 0.0, r + t)), cfg.tol_null_zero)
            } else {
                let kappa = cfg.kappa;
                let c = cfg.amplitude;
                let shift = move |t: f64| c * t.powf(kappa + 1.0) / (kappa + 1.0);
                if cfg.dim == 1 {
                    (Box::new(move |t| gaussian(grid, shift(t), r + t)), cfg.tol_null_constant)
                } else {
                    (
                        Box::new(move |t| Ok(ScalarField::gaussian(grid, [shift(t), shift(t)], r + t)?)),
                        cfg.tol_null_constant,
                    )
                }
            };
            let mut err = 0.0f64;
            for (t, rho) in flow.times.iter().zip(&flow.densities) {
                err = err.max(sup_diff(rho, &exact_of(*t)?)?);
            }
            rep.push(ReportRow::at_most("linf_error_vs_exact", Some(0.0), err, tol));
            rep.push(ReportRow::within("iterations", 1.0, sr.iterations as f64, 0.0));
        }
        _ => {
            if let Some((amp, lt)) = pd.calibration {
                rep.push(ReportRow::reported("calibrated_amplitude", None, amp));
                rep.push(ReportRow::reported("lipschitz_times_horizon", None, lt));
            }
            let worst = sr.contraction_ratios.iter().copied().fold(0.0, f64::max);
            rep.push(ReportRow::at_least("converged", Some(1.0), if sr.converged { 1.0 } else { 0.0 }, 1.0));
            rep.push(ReportRow::at_most("max_contraction_ratio", None, worst, cfg.tol_contraction));
            rep.push(ReportRow::at_most("residual", Some(0.0), sr.residual, cfg.tol_residual));
            rep.push(ReportRow::at_most("iterations", None, sr.iterations as f64, cfg.tol_iterations));
            rep.series.push(Series::new(
                "picard_distance",
                "iteration",
                "distance",
                sr.distances.iter().enumerate().map(|(i, d)| ((i + 1) as f64, *d)).collect(),
            ));

            // Ratios over a fixed number of iterations at each λ.
            let sweep_opts = SolverOptions { max_iterations: 5, tolerance: 1e-30, ..opts.clone() };
            let mut pts = Vec::new();
            for &lambda in &cfg.lambdas {
                let (_, s) = picard_solve(&gamma, pd.drift.as_ref(), &pd.params.with_lambda(lambda), &sweep_opts)?;
                pts.push((lambda, s.contraction_ratios.iter().copied().fold(0.0, f64::max)));
            }
            let increase = pts
                .windows(2)
                .map(|w| (w[1].1 - w[0].1) / w[0].1.max(f64::MIN_POSITIVE))
                .fold(f64::NEG_INFINITY, f64::max);
            if pts.len() >= 2 {
                rep.push(ReportRow::at_most("ratio_increase_over_lambda", Some(0.0), increase, cfg.tol_lambda_monotone));
            }
            rep.series.push(Series::new("ratio_vs_lambda", "lambda", "max ratio", pts));
        }
    }
    solve_rows(&mut rep, &sr);

    if cfg.shift_r > 0.0 {
        let mut spike = vec![0.0; grid.len()];
        spike[grid.origin_index()] = 1.0 / grid.cell_volume();
        let gamma0 = ScalarField::new(grid, spike)?;
        let (shifted, _) = time_shift_solve(&gamma0, pd.drift.as_ref(), &pd.params, cfg.shift_r, &opts)?;
        let smoothed = gaussian(grid, 0.0, cfg.shift_r)?;
        let (direct, _) = picard_solve(&smoothed, pd.drift.as_ref(), &pd.params, &opts)?;
        let mut worst = 0.0f64;
        let mut pts = Vec::new();
        for ((t, a), b) in direct.times.iter().zip(&direct.densities).zip(&shifted.densities) {
            let e = a.sub(b)?.l1_norm();
            worst = worst.max(e);
            pts.push((*t, e));
        }
        rep.push(ReportRow::at_most("time_shift_max_l1", Some(0.0), worst, cfg.tol_time_shift));
        rep.push(ReportRow::reported("time_shift_initial_sup", Some(0.0), sup_diff(&shifted.initial, &smoothed)?));
        rep.series.push(Series::new("time_shift_l1", "t", "L1 difference", pts));
    }
    Ok((flow, rep))
}

pub fn decay(cfg: &ExperimentConfig) -> Result<RunReport> {
    let grid = grid_for(cfg)?;
    let opts = solver_options(cfg);
    let mut rep = RunReport::new(provenance(cfg, &grid));
    let mut sups = Vec::new();
    for &r in &cfg.r_list {
        let pd = prepare_drift(cfg, &grid, FlowParams::geometric_times(r, cfg.horizon, cfg.time_count))?;
        let gamma = gaussian(grid, 0.0, r)?;
        let (_, sr) = picard_solve(&gamma, pd.drift.as_ref(), &pd.params, &opts)?;
        let sup = sr.decay_trajectory.iter().map(|p| p.1).fold(0.0, f64::max);
        rep.push(ReportRow::reported(format!("sup_decay_r={r}"), None, sup));
        rep.push(ReportRow::reported(format!("fitted_b_r={r}"), None, sr.fitted_b));
        rep.push(ReportRow::reported(format!("envelope_rate_r={r}"), None, sr.envelope_rate));
        rep.series.push(Series::new(format!("decay_r={r}"), "t", "t^(eta/2) norm", sr.decay_trajectory.clone()));
        sups.push(sup);
    }
    let max = sups.iter().copied().fold(0.0, f64::max);
    let min = sups.iter().copied().fold(f64::INFINITY, f64::min);
    rep.push(ReportRow::at_most("relative_spread", None, (max - min) / max, cfg.tol_decay_spread));
    Ok(rep)
}

/// `(1/k)`-free form of the stability exponent `-(1+δ)/2 - d/(2k)`.
pub fn stability_exponent(params: &FlowParams) -> f64 {
    -(1.0 + params.delta) / 2.0 - params.dim as f64 * params.k.reciprocal() / 2.0
}

pub fn stability(cfg: &ExperimentConfig) -> Result<RunReport> {
    if cfg.dim != 1 {
        return Err(BenchError::Config("stability measures W1 by quantiles and needs dim = 1".into()));
    }
    let grid = grid_for(cfg)?;
    let (t0, t1, n) = window(cfg);
    let pd = prepare_drift(cfg, &grid, FlowParams::geometric_times(t0, t1, n))?;
    let opts = solver_options(cfg);
    let lat = BallLattice::new(&grid)?;
    let idx = pd.params.flow_index();
    let theory = stability_exponent(&pd.params);
    let r = variance(cfg);
    let gamma = gaussian(grid, 0.0, r)?;
    let base = flow_from(&gamma, &pd, &opts)?;
    let probe_cfg = ProbeConfig { seed: cfg.seed, ..ProbeConfig::default() };
    let mut rep = RunReport::new(provenance(cfg, &grid));
    let mut ratios: Vec<Vec<f64>> = Vec::new();
    for &h in &cfg.separations {
        let other = gaussian(grid, h, r)?;
        let w1 = wasserstein_1d(&gamma, &other, 1.0)?;
        let moved = flow_from(&other, &pd, &opts)?;
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for ((t, a), b) in base.times.iter().zip(&base.densities).zip(&moved.densities) {
            let diff = a.sub(b)?;
            upper.push((*t, measure_dual_norm(&diff, idx, &lat, DualMethod::Amalgam)? / w1));
            lower.push((*t, measure_dual_norm(&diff, idx, &lat, DualMethod::Probe(probe_cfg))? / w1));
        }
        let fit = fit_exponent(&upper)?;
        rep.push(ReportRow::within(format!("slope_h={h}"), theory, fit.slope, cfg.tol_stability_slope));
        rep.push(ReportRow::reported(format!("slope_lower_bracket_h={h}"), Some(theory), fit_exponent(&lower)?.slope));
        rep.push(ReportRow::reported(format!("w1_h={h}"), Some(h), w1));
        ratios.push(upper.iter().map(|p| p.1).collect());
        rep.series.push(Series::new(format!("ratio_h={h}"), "t", "norm / W1", upper));
        rep.series.push(Series::new(format!("ratio_lower_h={h}"), "t", "norm / W1", lower));
    }
    if ratios.len() >= 2 {
        let spread = (0..base.times.len())
            .map(|i| {
                let col: Vec<f64> = ratios.iter().map(|r| r[i]).collect();
                let max = col.iter().copied().fold(0.0, f64::max);
                let min = col.iter().copied().fold(f64::INFINITY, f64::min);
                (max - min) / max
            })
            .fold(0.0, f64::max);
        rep.push(ReportRow::at_most("linearity_spread", Some(0.0), spread, cfg.tol_linearity));
    }
    Ok(rep)
}

pub fn entropy_cost(cfg: &ExperimentConfig) -> Result<RunReport> {
    if cfg.dim != 1 {
        return Err(BenchError::Config("entropy_cost measures W2 by quantiles and needs dim = 1".into()));
    }
    let grid = grid_for(cfg)?;
    let (t0, t1, n) = window(cfg);
    let pd = prepare_drift(cfg, &grid, FlowParams::geometric_times(t0, t1, n))?;
    let opts = solver_options(cfg);
    let r = variance(cfg);
    let gamma = gaussian(grid, 0.0, r)?;
    let base = flow_from(&gamma, &pd, &opts)?;
    let zero = pd.drift.is_zero();
    let mut rep = RunReport::new(provenance(cfg, &grid));
    let mut overall = 0.0f64;
    let mut mismatch = 0.0f64;
    for &h in &cfg.separations {
        let other = gaussian(grid, h, r)?;
        let w2 = wasserstein_1d(&gamma, &other, 2.0)?;
        let moved = flow_from(&other, &pd, &opts)?;
        let mut pts = Vec::new();
        for ((t, a), b) in base.times.iter().zip(&base.densities).zip(&moved.densities) {
            let v = relative_entropy(a, b)? * t / (w2 * w2);
            if zero {
                mismatch = mismatch.max((v - t / (2.0 * (r + t))).abs());
            }
            pts.push((*t, v));
        }
        let sup = pts.iter().map(|p| p.1).fold(0.0, f64::max);
        overall = overall.max(sup);
        rep.push(ReportRow::reported(format!("beta_envelope_h={h}"), None, sup));
        rep.series.push(Series::new(format!("entropy_cost_h={h}"), "t", "Ent t / W2^2", pts));
    }
    if zero {
        rep.push(ReportRow::at_most("sup_entropy_cost", Some(0.5), overall, cfg.tol_entropy_zero));
        rep.push(ReportRow::at_most("analytic_mismatch", Some(0.0), mismatch, cfg.tol_entropy_match));
    } else {
        rep.push(ReportRow::at_most("sup_entropy_cost", None, overall, cfg.tol_entropy_small));
    }
    Ok(rep)
}

pub fn particles(cfg: &ExperimentConfig) -> Result<RunReport> {
    let grid = grid_for(cfg)?;
    let r = variance(cfg);
    let zero = cfg.kernel == "zero";
    let times = if zero {
        FlowParams::uniform_times(cfg.horizon, 4)
    } else {
        FlowParams::uniform_times(cfg.horizon, cfg.time_count)
    };
    let pd = prepare_drift(cfg, &grid, times)?;
    let gamma = gaussian(grid, 0.0, r)?;
    let flow = flow_from(&gamma, &pd, &solver_options(cfg))?;
    let moll = pd.spec.as_ref().map(|s| s.mollification).filter(|&m| m > 0.0).unwrap_or(cfg.dt);
    let sim = SimConfig::new(cfg.dt, cfg.horizon, cfg.seed, moll, InitialSampler::gaussian(vec![0.0; cfg.dim], r), grid);
    let study = chaos_convergence_study(&sim, pd.drift.as_ref(), &cfg.n_list, cfg.replicates, &flow, cfg.bandwidth)?;
    let at_t = study.at_time(cfg.horizon);
    let mut rep = RunReport::new(provenance(cfg, &grid));
    for s in &at_t {
        rep.push(ReportRow::reported(format!("w1_mean_n={}", s.n), None, s.w1_mean));
        rep.push(ReportRow::reported(format!("w1_stderr_n={}", s.n), None, s.w1_stderr()));
    }
    let fit = study.rate_fit(cfg.horizon)?;
    if zero {
        rep.push(ReportRow::within("mc_rate_slope", -0.5, fit.slope, cfg.tol_mc_slope));
    } else {
        rep.push(ReportRow::reported("mc_rate_slope", Some(-0.5), fit.slope));
        for w in at_t.windows(2) {
            let allowance = cfg.tol_error_bars * (w[0].w1_stderr().powi(2) + w[1].w1_stderr().powi(2)).sqrt();
            rep.push(ReportRow::at_most(
                format!("w1_increase_n={}_to_{}", w[0].n, w[1].n),
                Some(0.0),
                w[1].w1_mean - w[0].w1_mean,
                allowance,
            ));
        }
    }
    if !study.failures.is_empty() {
        rep.notes.push(format!("{} particle runs failed", study.failures.len()));
    }
    rep.series.push(Series::new("w1_vs_n", "N", "W1", at_t.iter().map(|s| (s.n as f64, s.w1_mean)).collect()));
    Ok(rep)
}

pub fn bessel_identity(cfg: &ExperimentConfig) -> Result<RunReport> {
    let grid = grid_for(cfg)?;
    let mut rep = RunReport::new(provenance(cfg, &grid));
    for &r in &cfg.bessel_orders {
        let mut worst = 0.0f64;
        for i in 0..cfg.random_fields {
            let f = ScalarField::new(grid, random_field(&grid, cfg.seed, i)?)?;
            let spectral = bessel_apply(&f, r, BesselMode::Spectral)?;
            let quad = bessel_apply(&f, r, BesselMode::GammaQuadrature { nodes: cfg.quadrature_nodes })?;
            worst = worst.max(quad.sub(&spectral)?.l2_norm() / spectral.l2_norm());
        }
        rep.push(ReportRow::at_most(format!("relative_l2_r={r}"), Some(0.0), worst, cfg.tol_bessel));
    }
    Ok(rep)
}

/// Band-limited random field: a few dozen Fourier modes with Gaussian amplitudes.
fn random_field(grid: &GridSpec<f64>, seed: u64, index: usize) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let l = grid.extent();
    let modes: Vec<([f64; 2], f64, f64)> = (0..24)
        .map(|_| {
            let k = [rng.random_range(-16i64..=16) as f64, rng.random_range(-16i64..=16) as f64];
            (k, rng.random_range(-1.0..1.0), rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let dim = grid.dim();
    Ok((0..grid.len())
        .map(|i| {
            let x = grid.position(i);
            modes
                .iter()
                .map(|(k, a, ph)| {
                    let arg: f64 = (0..dim).map(|ax| k[ax] * x[ax]).sum::<f64>() * std::f64::consts::TAU / l;
                    a * (arg + ph).cos()
                })
                .sum()
        })
        .collect())
}

fn random_density(grid: GridSpec<f64>, rng: &mut ChaCha8Rng) -> Result<ScalarField<f64>> {
    let mut acc = ScalarField::zeros(grid);
    for _ in 0..rng.random_range(1..4) {
        let g = gaussian(grid, rng.random_range(-3.0..3.0), rng.random_range(0.05..1.0))?;
        acc = acc.combine(1.0, &g, rng.random_range(0.1..1.0))?;
    }
    Ok(acc.normalized()?)
}

fn random_measure(rng: &mut ChaCha8Rng, m: usize, dim: usize) -> Result<DiscreteMeasure> {
    let pts: Vec<f64> = (0..m * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut w: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w[m - 1] = 1.0 - w[..m - 1].iter().sum::<f64>();
    Ok(DiscreteMeasure::new(dim, pts, w)?)
}

pub fn metrics_oracles(cfg: &ExperimentConfig) -> Result<RunReport> {
    if cfg.dim != 1 {
        return Err(BenchError::Config("metrics_oracles runs in dim = 1".into()));
    }
    let grid = grid_for(cfg)?;
    let mut rep = RunReport::new(provenance(cfg, &grid));
    let pairs = [((-0.37, 0.3), (0.81, 0.3)), ((-0.37, 0.3), (0.2, 0.6)), ((0.0, 0.1), (0.5, 0.4)), ((0.3, 0.25), (-0.5, 0.25))];
    let (mut w2_err, mut ent_err) = (0.0f64, 0.0f64);
    for ((m1, v1), (m2, v2)) in pairs {
        let (ga, gb) = (GaussianSpec::new(vec![m1], v1)?, GaussianSpec::new(vec![m2], v2)?);
        let (a, b) = (ga.density(grid)?, gb.density(grid)?);
        w2_err = w2_err.max((wasserstein_1d(&a, &b, 2.0)? - ga.w2(&gb)).abs());
        ent_err = ent_err.max((relative_entropy(&a, &b)? - ga.relative_entropy(&gb)).abs());
    }
    rep.push(ReportRow::at_most("gaussian_w2_error", Some(0.0), w2_err, cfg.tol_closed_form));
    rep.push(ReportRow::at_most("gaussian_entropy_error", Some(0.0), ent_err, cfg.tol_closed_form));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ot_err = 0.0f64;
    for _ in 0..30 {
        let a = random_measure(&mut rng, 3, 2)?;
        let b = random_measure(&mut rng, 3, 2)?;
        for q in [1.0, 2.0] {
            let w = wasserstein_discrete(&a, &b, q)?;
            let brute = transport_cost_enumerate(&a, &b, q)?;
            ot_err = ot_err.max((w.powf(q) - brute).abs());
        }
    }
    rep.push(ReportRow::at_most("ot_vs_enumeration", Some(0.0), ot_err, cfg.tol_enumeration));

    // ‖·‖_var is the full mass of the difference, so the inequality reads ‖μ - ν‖_var ≤ √(2 Ent).
    let pgrid = GridSpec::new(1, 1024, 12.0)?;
    let floor = ScalarField::constant(pgrid, 1.0 / 12.0);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..cfg.random_pairs {
        let a = random_density(pgrid, &mut rng)?.combine(0.999, &floor, 0.001)?;
        let b = random_density(pgrid, &mut rng)?.combine(0.999, &floor, 0.001)?;
        let slack = total_variation(&a, &b)? - (2.0 * relative_entropy(&a, &b)?).sqrt();
        worst = worst.max(slack);
    }
    rep.push(ReportRow::at_most("pinsker_worst_slack", None, worst, cfg.tol_pinsker));
    Ok(rep)
}
