use mvflow_core::spectral::{
    bessel_apply, field_derivative, heat_apply, heat_gradient, quadrature::GammaRule, BesselMode,
    GridSpec, ScalarField,
};
use mvflow_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid1(n: usize, l: f64) -> GridSpec<f64> {
    GridSpec::new(1, n, l).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Random trigonometric polynomial with modes up to `kmax` along each axis.
fn band_limited(grid: GridSpec<f64>, kmax: usize, seed: u64) -> ScalarField<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = grid.extent();
    let terms: Vec<(f64, f64, f64, f64)> = (0..12)
        .map(|_| {
            (
                rng.random_range(-1.0..1.0),
                rng.random_range(0..=kmax) as f64,
                rng.random_range(0..=kmax) as f64,
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    ScalarField::from_fn(grid, |p| {
        terms
            .iter()
            .map(|&(a, kx, ky, ph)| {
                let ky = if grid.dim() == 2 { ky } else { 0.0 };
                a * (std::f64::consts::TAU * (kx * p[0] + ky * p[1]) / l + ph).cos()
            })
            .sum()
    })
    .unwrap()
}

#[test]
fn grid_rejects_bad_shapes() {
    assert!(GridSpec::new(3, 64, 1.0f64).is_err());
    assert!(GridSpec::new(1, 8, 1.0f64).is_err());
    assert!(GridSpec::new(1, 100, 1.0f64).is_err());
    assert!(GridSpec::new(1, 64, 0.0f64).is_err());
    let g = GridSpec::new(2, 32, 4.0f64).unwrap();
    assert_eq!(g.len(), 1024);
    assert_eq!(g.coord(g.origin_index()), 0.0);
}

#[test]
fn heat_of_gaussian_is_gaussian() {
    let g = grid1(1024, 10.0);
    let f = ScalarField::gaussian(g, [0.0, 0.0], 0.04).unwrap();
    let out = heat_apply(&f, 0.1).unwrap();
    let exact = ScalarField::gaussian(g, [0.0, 0.0], 0.14).unwrap();
    assert!(max_diff(out.values(), exact.values()) < 1e-8);
    assert!(!out.under_resolved);
}

#[test]
fn heat_of_cosine_is_damped_cosine() {
    let g = grid1(256, 8.0);
    let w = std::f64::consts::TAU * 3.0 / 8.0;
    let f = ScalarField::from_fn(g, |p| (w * p[0]).cos()).unwrap();
    let out = heat_apply(&f, 0.5).unwrap();
    let damp = (-0.5 * w * w / 2.0).exp();
    assert!(max_diff(out.values(), f.scale(damp).values()) < 1e-13);
}

#[test]
fn heat_rejects_nonpositive_time_and_flags_small_time() {
    let g = grid1(64, 4.0);
    let f = ScalarField::constant(g, 1.0);
    assert!(matches!(heat_apply(&f, 0.0), Err(Error::InvalidArgument(_))));
    assert!(heat_apply(&f, -1.0).is_err());
    let h = g.spacing();
    assert!(heat_apply(&f, h * h).unwrap().under_resolved);
    assert!(!heat_apply(&f, 4.1 * h * h).unwrap().under_resolved);
}

#[test]
fn heat_in_two_dimensions_matches_gaussian() {
    let g = GridSpec::new(2, 128, 8.0).unwrap();
    let f = ScalarField::gaussian(g, [0.5, -0.25], 0.1).unwrap();
    let out = heat_apply(&f, 0.15).unwrap();
    let exact = ScalarField::gaussian(g, [0.5, -0.25], 0.25).unwrap();
    assert!(max_diff(out.values(), exact.values()) < 1e-9);
    assert!((out.integral() - 1.0).abs() < 1e-12);
}

#[test]
fn heat_gradient_of_constant_vanishes_and_of_sine_is_exact() {
    let g = grid1(128, 2.0 * std::f64::consts::PI);
    let c = heat_gradient(&ScalarField::constant(g, 3.0), 0.2).unwrap();
    assert!(c.sup_norm() < 1e-13);
    let w = 4.0;
    let f = ScalarField::from_fn(g, |p| (w * p[0]).sin()).unwrap();
    let grad = heat_gradient(&f, 0.3).unwrap();
    let exact: Vec<f64> = (0..g.len())
        .map(|i| w * (-0.3 * w * w / 2.0).exp() * (w * g.coord(i)).cos())
        .collect();
    assert!(max_diff(grad.component(0), &exact) < 1e-12);
}

#[test]
fn heat_gradient_of_point_mass_decays_with_predicted_slope() {
    // sup |∇ p_t| ∝ t^{-(1+d)/2}
    let g = grid1(2048, 16.0);
    let f = ScalarField::gaussian(g, [0.0, 0.0], 1e-4).unwrap();
    let ts: Vec<f64> = (0..12).map(|i| 0.01 * 100f64.powf(i as f64 / 11.0)).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = ts
        .iter()
        .map(|&t| (t.ln(), heat_gradient(&f, t).unwrap().sup_norm().ln()))
        .unzip();
    let slope = ols_slope(&xs, &ys);
    assert!((slope + 1.0).abs() < 0.1, "slope {slope}");
}

fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn bessel_identity_and_eigenfunction() {
    let g = grid1(256, 8.0);
    let f = band_limited(g, 20, 3);
    let same = bessel_apply(&f, 0.0, BesselMode::Spectral).unwrap();
    assert!(same == f);
    let w = std::f64::consts::TAU * 5.0 / 8.0;
    let c = ScalarField::from_fn(g, |p| (w * p[0]).cos()).unwrap();
    let out = bessel_apply(&c, 0.5, BesselMode::Spectral).unwrap();
    assert!(max_diff(out.values(), c.scale((1.0 + w * w).powf(-0.5)).values()) < 1e-13);
    assert!(bessel_apply(&f, -0.1, BesselMode::Spectral).is_err());
    assert!(bessel_apply(&f, 0.0, BesselMode::GammaQuadrature { nodes: 200 }).is_err());
}

#[test]
fn bessel_gamma_quadrature_matches_multiplier() {
    for (r, seed) in [(0.25, 1u64), (0.75, 2), (1.5, 3)] {
        for g in [grid1(1024, 10.0), GridSpec::new(2, 64, 6.0).unwrap()] {
            let f = band_limited(g, g.points_per_dim() / 2 - 1, seed);
            let a = bessel_apply(&f, r, BesselMode::Spectral).unwrap();
            let b = bessel_apply(&f, r, BesselMode::GammaQuadrature { nodes: 200 }).unwrap();
            let err = rel_l2(b.values(), a.values());
            assert!(err < 1e-6, "r={r} dim={} err={err}", g.dim());
        }
    }
}

#[test]
fn gamma_rule_has_requested_size() {
    assert_eq!(GammaRule::new(0.75, 200).unwrap().len(), 200);
}

#[test]
fn derivative_examples() {
    let g = grid1(512, 10.0);
    let f = ScalarField::gaussian(g, [0.0, 0.0], 0.2).unwrap();
    assert_eq!(field_derivative(&f, &[0]).unwrap(), f);
    let d = field_derivative(&f, &[1]).unwrap();
    let exact: Vec<f64> = (0..g.len()).map(|i| -g.coord(i) / 0.2 * f.values()[i]).collect();
    assert!(max_diff(d.values(), &exact) < 1e-8);
    let w = std::f64::consts::TAU * 7.0 / 10.0;
    let s = ScalarField::from_fn(g, |p| (w * p[0]).sin()).unwrap();
    let d2 = field_derivative(&s, &[2]).unwrap();
    assert!(max_diff(d2.values(), s.scale(-w * w).values()) < 1e-10 * w * w);
    assert!(matches!(
        field_derivative(&f, &[5]),
        Err(Error::UnsupportedOrder { order: 5, max: 4 })
    ));
}

#[test]
fn single_precision_heat_roughly_matches() {
    let g = GridSpec::new(1, 256, 10.0f32).unwrap();
    let f = ScalarField::gaussian(g, [0.0, 0.0], 0.04).unwrap();
    let out = heat_apply(&f, 0.1).unwrap();
    let exact = ScalarField::gaussian(g, [0.0, 0.0], 0.14).unwrap();
    let err = out.values().iter().zip(exact.values()).map(|(a, b)| (a - b).abs()).fold(0.0f32, f32::max);
    assert!(err < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn heat_semigroup_law(s in 1e-3f64..2.0, t in 1e-3f64..2.0, seed in any::<u64>()) {
        let g = grid1(128, 8.0);
        let f = band_limited(g, 20, seed);
        let two = heat_apply(&heat_apply(&f, s).unwrap(), t).unwrap();
        let one = heat_apply(&f, s + t).unwrap();
        let scale = f.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        let err = two.values().iter().zip(one.values()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-10 * scale);
    }

    #[test]
    fn bessel_composition(r1 in 0.0f64..2.0, r2 in 0.0f64..2.0, seed in any::<u64>()) {
        let g = grid1(128, 8.0);
        let f = band_limited(g, 30, seed);
        let two = bessel_apply(&bessel_apply(&f, r1, BesselMode::Spectral).unwrap(), r2, BesselMode::Spectral).unwrap();
        let one = bessel_apply(&f, r1 + r2, BesselMode::Spectral).unwrap();
        prop_assert!(max_diff(two.values(), one.values()) < 1e-10);
    }

    #[test]
    fn bessel_commutes_with_derivatives(r in 0.0f64..2.0, ord in 0usize..=4, seed in any::<u64>()) {
        let g = GridSpec::new(2, 32, 6.0).unwrap();
        let f = band_limited(g, 10, seed);
        let order = [ord / 2, ord - ord / 2];
        let a = bessel_apply(&field_derivative(&f, &order).unwrap(), r, BesselMode::Spectral).unwrap();
        let b = field_derivative(&bessel_apply(&f, r, BesselMode::Spectral).unwrap(), &order).unwrap();
        let scale = a.sup_norm().max(1.0);
        prop_assert!(max_diff(a.values(), b.values()) < 1e-10 * scale);
    }

    #[test]
    fn heat_preserves_mass_and_positivity(var in 0.005f64..0.5, m in -1.0f64..1.0, t in 1e-3f64..1.0) {
        let g = grid1(512, 12.0);
        let f = ScalarField::gaussian(g, [m, 0.0], var).unwrap();
        let bump = f.map(|v| if v > 0.5 { v } else { 0.0 });
        let out = heat_apply(&bump, t).unwrap();
        prop_assert!((out.integral() - bump.integral()).abs() < 1e-12);
        prop_assert!(out.values().iter().all(|&v| v > -1e-12));
    }
}
