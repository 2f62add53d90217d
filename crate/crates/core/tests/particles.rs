use mvflow_core::kernels::*;
use mvflow_core::particles::*;
use mvflow_core::solver::{heat_flow, FlowParams, MeasureFlow};
use mvflow_core::{GridSpec, ScalarField};

fn cfg(grid: GridSpec<f64>, dt: f64, horizon: f64, seed: u64, variance: f64) -> SimConfig<f64> {
    SimConfig::new(dt, horizon, seed, dt, InitialSampler::gaussian(vec![0.0; grid.dim()], variance), grid)
}

#[test]
fn brownian_variance_growth() {
    let grid = GridSpec::<f64>::new(1, 256, 16.0).unwrap();
    let c = cfg(grid, 0.01, 1.0, 7, 0.1);
    let traj = simulate_particles(&c, 10_000, &ZeroDrift).unwrap();
    let growth = traj.last().variance()[0] - traj.snapshots[0].variance()[0];
    assert!((growth - 1.0).abs() < 0.05, "variance growth {growth}");
    assert_eq!(traj.last().wraps, 0);
}

#[test]
fn constant_drift_moves_the_mean() {
    let grid = GridSpec::<f64>::new(1, 256, 16.0).unwrap();
    let c = 0.6;
    let spec = KernelSpec::stationary(KernelVariant::ConstantVector(vec![c]), 0.0).unwrap();
    let kernel = PreparedKernel::new(&spec, &grid).unwrap();
    let conf = cfg(grid, 0.01, 1.0, 12, 0.2);
    let traj = simulate_particles(&conf, 1000, &kernel).unwrap();
    let shift = traj.last().mean()[0] - traj.snapshots[0].mean()[0];
    assert!((shift - c).abs() < 3.0 / (1000f64).sqrt(), "mean shift {shift}");
}

#[test]
fn binned_drift_matches_pairwise_sum() {
    let grid = GridSpec::<f64>::new(1, 2048, 8.0).unwrap();
    let spec = KernelSpec::stationary(KernelVariant::RieszOrder { c: vec![1.0], n0: 0, eps0: 0.5 }, 1e-3).unwrap();
    let kernel = PreparedKernel::new(&spec, &grid).unwrap();
    let conf = cfg(grid, 1e-3, 1e-3, 3, 0.1);
    let ens = sample_initial(&conf, 1000).unwrap();
    let binned = binned_drift(&ens, &kernel, &grid, 1.0, true).unwrap();
    let n = ens.len();
    let mut worst = 0.0f64;
    for i in (0..n).step_by(10) {
        let xi = ens.particle(i)[0];
        let mut s = 0.0;
        for j in 0..n {
            s += direct_kernel_value(&spec, [xi - ens.particle(j)[0], 0.0], 8.0).unwrap()[0];
        }
        worst = worst.max((s / n as f64 - binned[i]).abs());
    }
    assert!(worst < 1e-3, "sup difference {worst}");
}

#[test]
fn empirical_density_examples() {
    let grid = GridSpec::<f64>::new(1, 512, 8.0).unwrap();
    let single = ParticleEnsemble::new(1, vec![0.0, 0.0], 0.0).unwrap();
    let kde = empirical_density(&single, &grid, 0.1).unwrap();
    let exact = ScalarField::gaussian(grid, [0.0, 0.0], 0.01).unwrap();
    assert!(kde.sub(&exact).unwrap().sup_norm() < 1e-8);
    assert!((kde.integral() - 1.0).abs() < 1e-12);
    assert!(empirical_density(&single, &grid, 1e-3).is_err());

    let mut conf = cfg(grid, 0.01, 1.0, 5, 1e-12);
    conf.initial = InitialSampler::gaussian(vec![0.0], 1e-12);
    let traj = simulate_particles(&conf, 100_000, &ZeroDrift).unwrap();
    let kde = empirical_density(traj.last(), &grid, 0.1).unwrap();
    let target = ScalarField::gaussian(grid, [0.0, 0.0], 1.0).unwrap();
    let l1 = kde.sub(&target).unwrap().l1_norm();
    assert!(l1 < 0.02, "L1 {l1}");
    assert!((kde.integral() - 1.0).abs() < 1e-12);
}

#[test]
fn two_dimensional_run() {
    let grid = GridSpec::<f64>::new(2, 64, 8.0).unwrap();
    let conf = cfg(grid, 0.01, 0.5, 1, 0.2);
    let traj = simulate_particles(&conf, 5000, &ZeroDrift).unwrap();
    let v = traj.last().variance();
    for vi in v {
        assert!((vi - 0.7).abs() < 0.07);
    }
    let kde = empirical_density(traj.last(), &grid, 0.2).unwrap();
    assert!((kde.integral() - 1.0).abs() < 1e-12);
}

#[test]
fn runs_are_deterministic() {
    let grid = GridSpec::<f64>::new(1, 256, 8.0).unwrap();
    let spec = KernelSpec::stationary(KernelVariant::RieszOrder { c: vec![2.0], n0: 0, eps0: 0.5 }, 2e-3).unwrap();
    let kernel = PreparedKernel::new(&spec, &grid).unwrap();
    let conf = cfg(grid, 2e-3, 0.1, 99, 0.1);
    let a = simulate_particles(&conf, 500, &kernel).unwrap();
    let b = simulate_particles(&conf, 500, &kernel).unwrap();
    assert_eq!(a, b);
    // Particle 0 draws the same initial position whatever N is.
    let small = sample_initial(&conf, 10).unwrap();
    assert_eq!(small.particle(0), a.snapshots[0].particle(0));
}

#[test]
fn permuting_particles_permutes_trajectories() {
    let grid = GridSpec::<f64>::new(1, 256, 8.0).unwrap();
    let spec = KernelSpec::stationary(KernelVariant::RieszOrder { c: vec![2.0], n0: 0, eps0: 0.5 }, 2e-3).unwrap();
    let kernel = PreparedKernel::new(&spec, &grid).unwrap();
    let conf = cfg(grid, 2e-3, 0.1, 4, 0.1);
    let n = 300;
    let init = sample_initial(&conf, n).unwrap();
    let streams: Vec<u64> = (0..n as u64).collect();
    let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
    let permuted_pos: Vec<f64> = perm.iter().map(|&i| init.positions[i]).collect();
    let permuted_streams: Vec<u64> = perm.iter().map(|&i| streams[i]).collect();
    let a = simulate_from(&conf, init.clone(), &streams, &kernel).unwrap();
    let b = simulate_from(&conf, ParticleEnsemble::new(1, permuted_pos, 0.0).unwrap(), &permuted_streams, &kernel)
        .unwrap();
    for (k, &i) in perm.iter().enumerate() {
        assert!((a.last().positions[i] - b.last().positions[k]).abs() < 1e-10);
    }
}

#[test]
fn zero_kernel_law_across_seeds() {
    let grid = GridSpec::<f64>::new(1, 256, 16.0).unwrap();
    let n = 2000;
    let (v0, t) = (0.3, 0.5);
    for seed in 0..20 {
        let conf = cfg(grid, 0.01, t, 1000 + seed, v0);
        let last = simulate_particles(&conf, n, &ZeroDrift).unwrap().last().clone();
        let var = v0 + t;
        let mean_se = (var / n as f64).sqrt();
        let var_se = var * (2.0 / (n - 1) as f64).sqrt();
        assert!(last.mean()[0].abs() < 4.0 * mean_se);
        assert!((last.variance()[0] - var).abs() < 4.0 * var_se);
    }
}

fn zero_kernel_flow(grid: GridSpec<f64>, variance: f64, horizon: f64) -> MeasureFlow<f64> {
    let gamma = ScalarField::gaussian(grid, [0.0, 0.0], variance).unwrap();
    heat_flow(&gamma, &FlowParams::uniform_times(horizon, 4)).unwrap()
}

#[test]
fn zero_kernel_monte_carlo_rate() {
    let grid = GridSpec::<f64>::new(1, 512, 16.0).unwrap();
    let flow = zero_kernel_flow(grid, 0.1, 0.2);
    let conf = cfg(grid, 0.01, 0.2, 21, 0.1);
    let study = chaos_convergence_study(&conf, &ZeroDrift, &[250, 1000, 4000], 10, &flow, 0.1).unwrap();
    assert!(study.failures.is_empty());
    let fit = study.rate_fit(0.2).unwrap();
    assert!((fit.slope + 0.5).abs() < 0.15, "slope {}", fit.slope);
    // Same seed and N: identical table.
    let again = chaos_convergence_study(&conf, &ZeroDrift, &[250, 1000, 4000], 10, &flow, 0.1).unwrap();
    assert_eq!(study, again);
}

#[test]
fn seed_spread_shrinks_like_inverse_root() {
    let grid = GridSpec::<f64>::new(1, 512, 16.0).unwrap();
    let flow = zero_kernel_flow(grid, 0.1, 0.2);
    let conf = cfg(grid, 0.02, 0.2, 500, 0.1);
    let means = |reps: usize, offset: u64| -> Vec<f64> {
        (0..24)
            .map(|b| {
                let mut c = conf.clone();
                c.seed = offset + 100 * b;
                let s = chaos_convergence_study(&c, &ZeroDrift, &[200], reps, &flow, 0.1).unwrap();
                s.at_time(0.2)[0].w1_mean
            })
            .collect()
    };
    let sd = |xs: &[f64]| {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
    };
    let ratio = sd(&means(4, 1)) / sd(&means(16, 50_001));
    // Expected 2; the sd over 24 batches is itself noisy.
    assert!(ratio > 1.3 && ratio < 3.0, "ratio {ratio}");
}

#[test]
fn trajectory_dumps_as_flow() {
    let grid = GridSpec::<f64>::new(1, 128, 8.0).unwrap();
    let mut conf = cfg(grid, 0.01, 0.1, 2, 0.2);
    conf.checkpoints = vec![0.05];
    let traj = simulate_particles(&conf, 200, &ZeroDrift).unwrap();
    assert_eq!(traj.snapshots.len(), 3);
    let flow = trajectory_flow(&traj, &grid, 0.1).unwrap();
    assert_eq!(flow.times.len(), 2);
    let mut buf = Vec::new();
    flow.write_binary(&mut buf).unwrap();
    let back = MeasureFlow::<f64>::read_binary(buf.as_slice()).unwrap();
    assert_eq!(back.times, flow.times);
}

#[test]
fn config_validation() {
    let grid = GridSpec::<f64>::new(1, 128, 8.0).unwrap();
    let mut conf = cfg(grid, 0.01, 0.105, 2, 0.2);
    assert!(conf.validate().is_err());
    conf.horizon = 0.1;
    conf.mollification_eps = 0.001;
    assert!(conf.validate().is_err());
    conf.mollification_eps = 0.01;
    conf.checkpoints = vec![0.033];
    assert!(conf.validate().is_err());
    assert!(simulate_particles(&cfg(grid, 0.01, 0.1, 0, 0.1), 1, &ZeroDrift).is_err());
}
