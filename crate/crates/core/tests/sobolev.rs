use mvflow_core::sobolev::{
    dual_bracket, local_neg_norm, measure_dual_norm, operator_exponent_probe, sup_norm_constant,
    BallLattice, DualMethod, ProbeConfig, SobolevIndex,
};
use mvflow_core::spectral::{heat_apply, GridSpec, ScalarField};
use mvflow_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn idx(delta: f64, k: f64) -> SobolevIndex {
    SobolevIndex::new(delta, k).unwrap()
}

fn random_density(grid: GridSpec<f64>, rng: &mut ChaCha8Rng) -> ScalarField<f64> {
    let parts = rng.random_range(1..=3);
    let mut acc = ScalarField::zeros(grid);
    for _ in 0..parts {
        let m = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
        let v = rng.random_range(0.01..0.3);
        let g = ScalarField::gaussian(grid, m, v).unwrap();
        acc = acc.add(&g.scale(rng.random_range(0.2..1.0))).unwrap();
    }
    acc.normalized().unwrap()
}

#[test]
fn constant_field_norms() {
    let g = GridSpec::new(1, 512, 8.0).unwrap();
    let lat = BallLattice::new(&g).unwrap();
    assert!(lat.center_spacing() <= 0.5);
    let one = ScalarField::constant(g, 1.0);
    for k in [1.0, 2.0, 4.0] {
        for delta in [0.0, 0.7, 2.0] {
            let v = local_neg_norm(&one, idx(delta, k), &lat);
            assert!((v - 2f64.powf(1.0 / k)).abs() < 1e-12, "k={k} delta={delta}: {v}");
        }
    }
    assert!((local_neg_norm(&one, idx(1.0, f64::INFINITY), &lat) - 1.0).abs() < 1e-12);

    let g2 = GridSpec::new(2, 128, 8.0).unwrap();
    let lat2 = BallLattice::new(&g2).unwrap();
    let v = local_neg_norm(&ScalarField::constant(g2, 1.0), idx(0.5, 1.0), &lat2);
    assert!((v - std::f64::consts::PI).abs() < 1e-3 * std::f64::consts::PI, "{v}");
}

#[test]
fn lattice_rejects_coarse_or_small_grids() {
    assert!(BallLattice::new(&GridSpec::new(1, 16, 32.0).unwrap()).is_err());
    assert!(BallLattice::new(&GridSpec::new(1, 64, 2.0).unwrap()).is_err());
}

/// Mollified point mass at the origin with standard deviation `sd`.
fn bump(grid: GridSpec<f64>, sd: f64) -> ScalarField<f64> {
    ScalarField::gaussian(grid, [0.0, 0.0], sd * sd).unwrap()
}

#[test]
fn mollified_dirac_threshold_in_one_dimension() {
    let g = GridSpec::new(1, 8192, 16.0).unwrap();
    let lat = BallLattice::new(&g).unwrap();
    let inf = f64::INFINITY;
    let change = |delta: f64| {
        let a = local_neg_norm(&bump(g, 0.02), idx(delta, inf), &lat);
        let b = local_neg_norm(&bump(g, 0.01), idx(delta, inf), &lat);
        (b - a) / a
    };
    let smooth = change(1.5);
    assert!(smooth.abs() < 0.05, "delta=1.5 relative change {smooth}");
    let rough = change(0.5);
    // Predicted growth (sd ratio)^{(d-δ)} = 2^{0.5} - 1 ≈ 0.41.
    assert!(rough > 0.3, "delta=0.5 relative change {rough}");
}

#[test]
fn dual_norm_of_zero_and_argument_errors() {
    let g = GridSpec::new(1, 1024, 10.0).unwrap();
    let lat = BallLattice::new(&g).unwrap();
    let zero = ScalarField::zeros(g);
    assert_eq!(measure_dual_norm(&zero, idx(1.0, 2.0), &lat, DualMethod::Amalgam).unwrap(), 0.0);
    let probe = DualMethod::Probe(ProbeConfig::default());
    assert_eq!(measure_dual_norm(&zero, idx(1.0, 2.0), &lat, probe).unwrap(), 0.0);
    assert!(matches!(
        measure_dual_norm(&zero, idx(1.0, 1.0), &lat, DualMethod::Amalgam),
        Err(Error::Unsupported(_))
    ));
    let none = DualMethod::Probe(ProbeConfig { count: 0, ..ProbeConfig::default() });
    assert!(matches!(
        measure_dual_norm(&zero, idx(1.0, 2.0), &lat, none),
        Err(Error::InvalidArgument(_))
    ));
    let half = ScalarField::constant(g, 0.05);
    assert!(measure_dual_norm(&half, idx(1.0, 2.0), &lat, DualMethod::Amalgam).is_err());
}

/// Independent oracle: dense search over centers and widths; at each node the test function
/// is the least-squares projection of `F = (1-Δ)^{1/2} ρ` onto six Hermite functions, and its
/// windowed L² norm is taken over every grid-point center.
fn hermite_grid_oracle(g: GridSpec<f64>, rho: &ScalarField<f64>) -> f64 {
    let n = g.points_per_dim();
    let h = g.spacing();
    let xs: Vec<f64> = (0..n).map(|j| g.coord(j)).collect();
    let l = g.extent();
    // F from an explicit cosine/sine series, independent of the FFT path.
    let modes = 400usize;
    let mut f = vec![0.0; n];
    for m in 0..=modes {
        let w = std::f64::consts::TAU * m as f64 / l;
        let (mut a, mut b) = (0.0, 0.0);
        for (x, r) in xs.iter().zip(rho.values()) {
            a += r * (w * x).cos();
            b += r * (w * x).sin();
        }
        let scale = if m == 0 { 1.0 } else { 2.0 } * h / l * (1.0 + w * w).sqrt();
        for (fx, x) in f.iter_mut().zip(&xs) {
            *fx += scale * (a * (w * x).cos() + b * (w * x).sin());
        }
    }
    let reach = (1.0 / h).round() as usize;
    let window_sup = |gv: &[f64]| -> f64 {
        let mut prefix = vec![0.0; n + 1];
        for j in 0..n {
            prefix[j + 1] = prefix[j] + gv[j] * gv[j];
        }
        (reach..n - reach)
            .map(|c| (prefix[c + reach + 1] - prefix[c - reach]) * h)
            .fold(0.0, f64::max)
            .sqrt()
    };
    let mut best: f64 = 0.0;
    for ci in 0..100 {
        let c = -0.5 + 1.1 * ci as f64 / 99.0;
        for wi in 0..100 {
            let w = (0.03f64.ln() + (1.0f64 / 0.03).ln() * wi as f64 / 99.0).exp();
            let basis: Vec<Vec<f64>> = (0..6)
                .map(|p| xs.iter().map(|x| { let u = (x - c) / w; (-u * u / 2.0).exp() * u.powi(p) }).collect())
                .collect();
            let mut ata = [[0.0; 6]; 6];
            let mut atb = [0.0; 6];
            for a in 0..6 {
                atb[a] = basis[a].iter().zip(&f).map(|(u, v)| u * v).sum();
                for b in 0..6 {
                    ata[a][b] = basis[a].iter().zip(&basis[b]).map(|(u, v)| u * v).sum();
                }
            }
            let coef = solve6(ata, atb);
            let gv: Vec<f64> = (0..n).map(|j| (0..6).map(|a| coef[a] * basis[a][j]).sum()).collect();
            let pairing: f64 = gv.iter().zip(&f).map(|(u, v)| u * v).sum::<f64>() * h;
            let norm = window_sup(&gv);
            if norm > 0.0 {
                best = best.max(pairing.abs() / norm);
            }
        }
    }
    best
}

fn solve6(mut a: [[f64; 6]; 6], mut b: [f64; 6]) -> [f64; 6] {
    for col in 0..6 {
        let piv = (col..6).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        if a[col][col].abs() < 1e-300 {
            continue;
        }
        for row in col + 1..6 {
            let m = a[row][col] / a[col][col];
            for k in col..6 {
                a[row][k] -= m * a[col][k];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = [0.0; 6];
    for row in (0..6).rev() {
        let s: f64 = (row + 1..6).map(|k| a[row][k] * x[k]).sum();
        x[row] = if a[row][row].abs() < 1e-300 { 0.0 } else { (b[row] - s) / a[row][row] };
    }
    x
}

#[test]
fn probe_matches_dense_oracle() {
    let g = GridSpec::new(1, 2048, 16.0).unwrap();
    let lat = BallLattice::new(&g).unwrap();
    let rho = ScalarField::gaussian(g, [0.0, 0.0], 0.04)
        .unwrap()
        .sub(&ScalarField::gaussian(g, [0.1, 0.0], 0.04).unwrap())
        .unwrap();
    let index = idx(1.0, 2.0);
    let probe = measure_dual_norm(&rho, index, &lat, DualMethod::Probe(ProbeConfig::default())).unwrap();
    let amalgam = measure_dual_norm(&rho, index, &lat, DualMethod::Amalgam).unwrap();
    let oracle = hermite_grid_oracle(g, &rho);
    assert!(probe <= amalgam);
    assert!(((probe - oracle) / oracle).abs() < 0.02, "probe {probe} oracle {oracle}");
}

#[test]
fn tv_is_controlled_by_dual_norm() {
    let g = GridSpec::new(1, 1024, 12.0).unwrap();
    let lat = BallLattice::new(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..50 {
        let index = idx([0.5, 1.0, 2.0][trial % 3], [2.0, 4.0, f64::INFINITY][trial % 3]);
        let c = sup_norm_constant(index, 1);
        let a = random_density(g, &mut rng);
        let b = random_density(g, &mut rng);
        let diff = a.sub(&b).unwrap();
        let tv = diff.l1_norm();
        let cfg = ProbeConfig { count: 16, seed: trial as u64, ..ProbeConfig::default() };
        let lower = measure_dual_norm(&diff, index, &lat, DualMethod::Probe(cfg)).unwrap();
        assert!(tv <= c * lower * 1.01, "trial {trial}: tv {tv} vs {}", c * lower);
    }
}

#[test]
fn local_norm_bounded_by_sup_norm() {
    let g = GridSpec::new(1, 1024, 12.0).unwrap();
    let lat = BallLattice::new(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let vals: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = heat_apply(&ScalarField::new(g, vals).unwrap(), 1e-3).unwrap();
        for (delta, k) in [(0.0, 2.0), (0.5, 1.0), (1.0, 3.0), (2.0, f64::INFINITY)] {
            let index = idx(delta, k);
            let lhs = local_neg_norm(&f, index, &lat);
            assert!(lhs <= sup_norm_constant(index, 1) * f.sup_norm() * 1.01);
        }
    }
}

#[test]
fn heat_operator_exponents() {
    let g = GridSpec::new(1, 2048, 16.0).unwrap();
    let ts: Vec<f64> = (0..10).map(|i| 0.01 * 100f64.powf(i as f64 / 9.0)).collect();
    let inf = f64::INFINITY;
    let flat = operator_exponent_probe(&g, 0, idx(1.0, 2.0), idx(1.0, 2.0), &ts, 48, 1).unwrap();
    assert!(flat.fit.slope.abs() < 0.05, "flat slope {}", flat.fit.slope);
    let grad = operator_exponent_probe(&g, 1, idx(0.0, inf), idx(0.0, inf), &ts, 48, 2).unwrap();
    assert!((grad.fit.slope + 0.5).abs() < 0.05, "gradient slope {}", grad.fit.slope);
    assert_eq!(grad.theory_slope, -0.5);
    assert_eq!(grad.rows.len(), ts.len());
}

#[test]
fn operator_probe_rejects_degenerate_inputs() {
    let g = GridSpec::new(1, 256, 16.0).unwrap();
    let a = idx(1.0, 2.0);
    assert!(operator_exponent_probe(&g, 0, a, a, &[0.1, 0.2, 0.3, 0.4], 4, 0).is_err());
    assert!(operator_exponent_probe(&g, 0, a, a, &[0.01, 0.1, 0.05, 1.0], 4, 0).is_err());
    assert!(operator_exponent_probe(&g, 0, idx(0.0, 2.0), a, &[0.01, 0.1, 0.5, 1.0], 4, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bracket_is_ordered_and_homogeneous(seed in any::<u64>(), delta in 0.0f64..2.0, kk in 0usize..3, c in -5.0f64..5.0) {
        let g = GridSpec::new(1, 512, 10.0).unwrap();
        let lat = BallLattice::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let diff = random_density(g, &mut rng).sub(&random_density(g, &mut rng)).unwrap();
        let index = idx(delta, [1.5, 2.0, f64::INFINITY][kk]);
        let cfg = ProbeConfig { count: 24, seed, ..ProbeConfig::default() };
        let b = dual_bracket(&diff, index, &lat, cfg).unwrap();
        prop_assert!(b.lower <= b.upper * (1.0 + 1e-12));
        let scaled = dual_bracket(&diff.scale(c), index, &lat, cfg).unwrap();
        prop_assert!((scaled.upper - c.abs() * b.upper).abs() <= 1e-10 * b.upper.max(1e-300));
        prop_assert!((scaled.lower - c.abs() * b.lower).abs() <= 1e-10 * b.lower.max(1e-300));
        let f = random_density(g, &mut rng);
        let n1 = local_neg_norm(&f.scale(c), index, &lat);
        prop_assert!((n1 - c.abs() * local_neg_norm(&f, index, &lat)).abs() <= 1e-12 * n1.max(1.0));
    }

    #[test]
    fn local_norm_decreases_in_delta(seed in any::<u64>(), d1 in 0.0f64..2.0, d2 in 0.0f64..2.0, k in 1.0f64..6.0) {
        let g = GridSpec::new(1, 512, 10.0).unwrap();
        let lat = BallLattice::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_density(g, &mut rng);
        let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(local_neg_norm(&f, idx(hi, k), &lat) <= local_neg_norm(&f, idx(lo, k), &lat) * (1.0 + 1e-12));
    }
}
