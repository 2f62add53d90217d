use approx::assert_relative_eq;
use mvflow_core::kernels::*;
use mvflow_core::sobolev::{dual_bracket, local_neg_norm_vector, ProbeConfig};
use mvflow_core::spectral::quadrature::gauss_legendre_on;
use mvflow_core::{BallLattice, Error, GridSpec, ScalarField, SobolevIndex, VectorField};
use proptest::prelude::*;

fn riesz(c: Vec<f64>, n0: u32, eps0: f64, eps: f64) -> KernelSpec<f64> {
    KernelSpec::stationary(KernelVariant::RieszOrder { c, n0, eps0 }, eps).unwrap()
}

#[test]
fn constant_kernel_realizes_and_drifts_to_constant() {
    let grid = GridSpec::new(2, 32, 8.0).unwrap();
    let spec = KernelSpec::stationary(KernelVariant::ConstantVector(vec![0.7, -1.2]), 0.0).unwrap();
    let h = realize_kernel(&spec, &grid).unwrap();
    for (i, c) in [0.7f64, -1.2].iter().enumerate() {
        assert!(h.component(i).iter().all(|v| (v - c).abs() < 1e-12));
    }
    let rho = ScalarField::gaussian(grid, [0.3, -0.2], 0.5).unwrap();
    let b = drift_from_kernel(&spec, &rho, 0.4).unwrap();
    for (i, c) in [0.7f64, -1.2].iter().enumerate() {
        assert!(b.field.component(i).iter().all(|v| (v - c).abs() < 1e-10));
    }
    assert_eq!(b.eps_sensitivity, 0.0);
}

#[test]
fn mollified_dirac_is_heat_kernel() {
    let grid = GridSpec::new(1, 1024, 8.0).unwrap();
    let eps = 0.01;
    let spec = KernelSpec::stationary(KernelVariant::DiracDerivative { order: 0, direction: vec![-1.0] }, eps).unwrap();
    let h = realize_kernel(&spec, &grid).unwrap();
    let g = ScalarField::gaussian(grid, [0.0, 0.0], eps).unwrap();
    for (a, b) in h.component(0).iter().zip(g.values()) {
        assert!((a + b).abs() < 1e-10);
    }
}

#[test]
fn dirac_derivatives_match_direct_route() {
    for (d, n, l) in [(1usize, 512usize, 8.0), (2, 128, 8.0)] {
        let grid = GridSpec::new(d, n, l).unwrap();
        let dir = if d == 1 { vec![1.0] } else { vec![0.6, 0.8] };
        for order in 0..=2 {
            let spec =
                KernelSpec::stationary(KernelVariant::DiracDerivative { order, direction: dir.clone() }, 0.05).unwrap();
            let h = realize_kernel(&spec, &grid).unwrap();
            let scale = h.sup_norm();
            for idx in (0..grid.len()).step_by(7) {
                let p = grid.position(idx);
                let v = direct_kernel_value(&spec, p, l).unwrap();
                for i in 0..d {
                    assert!((h.component(i)[idx] - v[i]).abs() < 1e-9 * scale, "d={d} order={order}");
                }
            }
        }
    }
}

#[test]
fn singular_kernels_require_mollification() {
    let grid = GridSpec::new(1, 64, 4.0).unwrap();
    let spec = riesz(vec![1.0], 0, 1.0, 0.0);
    assert_eq!(realize_kernel(&spec, &grid).unwrap_err(), Error::RequiresMollification);
    let dirac = KernelSpec::<f64>::stationary(KernelVariant::DiracDerivative { order: 1, direction: vec![1.0] }, 0.0)
        .unwrap();
    assert_eq!(realize_kernel(&dirac, &grid).unwrap_err(), Error::RequiresMollification);
    assert!(KernelSpec::<f64>::stationary(KernelVariant::RieszOrder { c: vec![1.0], n0: 0, eps0: 2.0 }, 0.1).is_err());
    assert!(TimeModulation::new(-0.5, vec![]).is_err());
    assert!(TimeModulation::new(0.0, vec![(0.0, 2.0), (1.0, 1.5)]).is_err());
    assert!(TimeModulation::new(0.0, vec![(0.0, 0.5)]).is_err());
    let wrong_dim = riesz(vec![1.0, 0.0], 0, 1.0, 0.1);
    assert!(matches!(realize_kernel(&wrong_dim, &grid), Err(Error::WrongDimension { .. })));
}

#[test]
fn riesz_symbol_matches_direct_route_one_dimension() {
    let grid: GridSpec<f64> = GridSpec::new(1, 4096, 16.0).unwrap();
    for (n0, eps0) in [(0, 0.5), (0, 1.0), (0, 1.5), (1, 0.0), (1, 0.5), (1, 1.0)] {
        // Symbols growing like |ξ|^2 leak past Nyquist unless smoothed a little more.
        let h2 = grid.spacing().powi(2);
        let eps = if 2.0 * n0 as f64 + eps0 > 2.5 { 8.0 * h2 } else { default_mollification(&grid) };
        let sigma = eps.sqrt();
        let spec = riesz(vec![1.3], n0, eps0, eps);
        let h = realize_kernel(&spec, &grid).unwrap();
        let mut worst: f64 = 0.0;
        for idx in 0..grid.len() {
            let z = grid.position(idx)[0];
            if z.abs() <= 5.0 * sigma || z.abs() > 4.0 {
                continue;
            }
            let direct = direct_kernel_value(&spec, [z, 0.0], 16.0).unwrap()[0];
            worst = worst.max(((h.component(0)[idx] - direct) / direct).abs());
        }
        assert!(worst < 0.01, "n0={n0} eps0={eps0}: worst relative error {worst}");
    }
}

#[test]
fn riesz_symbol_matches_direct_route_two_dimensions() {
    let grid = GridSpec::new(2, 256, 8.0).unwrap();
    let eps = default_mollification(&grid);
    let sigma = eps.sqrt();
    for (n0, eps0) in [(0, 0.5), (0, 1.0), (1, 0.5)] {
        let spec = riesz(vec![1.0, 0.5], n0, eps0, eps);
        let h = realize_kernel(&spec, &grid).unwrap();
        let mut worst: f64 = 0.0;
        for idx in (0..grid.len()).step_by(37) {
            let p = grid.position(idx);
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            if r <= 20.0 * sigma || r > 2.0 {
                continue;
            }
            let direct = direct_kernel_value(&spec, p, 8.0).unwrap();
            let dn = (direct[0].powi(2) + direct[1].powi(2)).sqrt();
            let err = ((h.component(0)[idx] - direct[0]).powi(2) + (h.component(1)[idx] - direct[1]).powi(2)).sqrt();
            worst = worst.max(err / dn);
        }
        assert!(worst < 0.01, "n0={n0} eps0={eps0}: worst relative error {worst}");
    }
}

/// `PV ∫ ρ(y) / (x - y) dy` by symmetric subtraction around the singularity.
fn hilbert_pv(rho: impl Fn(f64) -> f64, x: f64, reach: f64) -> f64 {
    let mut acc = 0.0;
    let panels = 400;
    let w = reach / panels as f64;
    for p in 0..panels {
        for (u, wt) in gauss_legendre_on(12, p as f64 * w, (p + 1) as f64 * w) {
            acc += wt * (rho(x - u) - rho(x + u)) / u;
        }
    }
    acc
}

#[test]
fn hilbert_drift_matches_principal_value_quadrature() {
    let grid = GridSpec::new(1, 4096, 16.0).unwrap();
    let var = 0.04;
    let rho = ScalarField::gaussian(grid, [0.0, 0.0], var).unwrap();
    let spec = riesz(vec![1.0], 0, 1.0, default_mollification(&grid));
    let b = drift_from_kernel(&spec, &rho, 1.0).unwrap();
    let g = |y: f64| (-y * y / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
    let sup_oracle = (0..400).map(|j| hilbert_pv(g, j as f64 * 0.005, 4.0).abs()).fold(0.0, f64::max);
    let sup_b = b.field.sup_norm();
    assert!(((sup_b - sup_oracle) / sup_oracle).abs() < 0.02, "{sup_b} vs {sup_oracle}");
    assert!(b.eps_sensitivity < 1e-3 * sup_b);
}

#[test]
fn time_envelope_scales_drift() {
    let grid = GridSpec::new(1, 256, 8.0).unwrap();
    let rho = ScalarField::gaussian(grid, [0.0, 0.0], 0.2).unwrap();
    let modulation = TimeModulation::new(1.0, vec![(0.0, 1.0), (1.0, 3.0)]).unwrap();
    let spec = KernelSpec::new(KernelVariant::RieszOrder { c: vec![1.0], n0: 0, eps0: 0.5 }, 0.01, modulation).unwrap();
    let b0 = drift_from_kernel(&spec, &rho, 0.0).unwrap();
    assert_eq!(b0.field.sup_norm(), 0.0);
    let b1 = drift_from_kernel(&spec, &rho, 0.5).unwrap().field;
    let b2 = drift_from_kernel(&spec, &rho, 1.0).unwrap().field;
    // K(0.5) t = 2 * 0.5, K(1) t = 3.
    assert_relative_eq!(b2.sup_norm() / b1.sup_norm(), 3.0, max_relative = 1e-12);
}

#[test]
fn drift_is_translation_equivariant_and_linear() {
    let grid = GridSpec::new(2, 64, 8.0).unwrap();
    let spec = riesz(vec![1.0, 1.0], 0, 1.0, default_mollification(&grid));
    let r1 = ScalarField::gaussian(grid, [0.5, -1.0], 0.3).unwrap();
    let r2 = ScalarField::gaussian(grid, [-1.5, 0.25], 0.6).unwrap();
    let b1 = drift_from_kernel(&spec, &r1, 1.0).unwrap().field;
    let b2 = drift_from_kernel(&spec, &r2, 1.0).unwrap().field;
    let mix = r1.combine(0.3, &r2, 0.7).unwrap();
    let bm = drift_from_kernel(&spec, &mix, 1.0).unwrap().field;
    let expected = VectorField::new(
        grid,
        (0..2)
            .map(|i| b1.component(i).iter().zip(b2.component(i)).map(|(a, b)| 0.3 * a + 0.7 * b).collect())
            .collect(),
    )
    .unwrap();
    assert!(bm.sup_distance(&expected).unwrap() < 1e-12 * bm.sup_norm().max(1.0));

    let shifted = r1.roll([5, -3]);
    let bs = drift_from_kernel(&spec, &shifted, 1.0).unwrap().field;
    for i in 0..2 {
        let rolled = b1.component_field(i).roll([5, -3]);
        let diff = rolled.values().iter().zip(bs.component(i)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12 * b1.sup_norm());
    }
}

fn random_density(grid: GridSpec<f64>, seed: u64) -> ScalarField<f64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut acc = ScalarField::zeros(grid);
    for _ in 0..3 {
        let m = [next() * 6.0 - 3.0, 0.0];
        let v = 0.01 + 0.3 * next();
        let g = ScalarField::gaussian(grid, m, v).unwrap();
        acc = acc.combine(1.0, &g, 0.2 + next()).unwrap();
    }
    acc.normalized().unwrap()
}

#[test]
fn drift_obeys_duality_envelope() {
    let grid = GridSpec::new(1, 2048, 16.0).unwrap();
    let lattice = BallLattice::new(&grid).unwrap();
    let idx = SobolevIndex::new(0.8, 2.0).unwrap();
    let spec = KernelSpec::new(
        KernelVariant::RieszOrder { c: vec![1.0], n0: 0, eps0: 0.5 },
        default_mollification(&grid),
        TimeModulation::power(0.5).unwrap(),
    )
    .unwrap();
    let h = realize_kernel(&spec, &grid).unwrap();
    let h_norm = local_neg_norm_vector(&h, idx, &lattice);
    let cfg = ProbeConfig { count: 16, ..ProbeConfig::default() };
    for seed in 0..6 {
        let t = 0.3 + 0.2 * seed as f64;
        let env = spec.modulation.factor(t);
        let mu = random_density(grid, seed);
        let nu = random_density(grid, seed + 100);
        let b_mu = drift_from_kernel(&spec, &mu, t).unwrap().field;
        let b_nu = drift_from_kernel(&spec, &nu, t).unwrap().field;
        let upper = dual_bracket(&mu, idx, &lattice, cfg).unwrap().upper;
        assert!(b_mu.sup_norm() <= 1.02 * env * upper * h_norm);
        let diff = mu.sub(&nu).unwrap();
        let upper_diff = dual_bracket(&diff, idx, &lattice, cfg).unwrap().upper;
        assert!(b_mu.sup_distance(&b_nu).unwrap() <= 1.02 * env * upper_diff * h_norm);
    }
}

#[test]
fn nemytskii_examples() {
    let grid = GridSpec::new(1, 512, 8.0).unwrap();
    let var = 0.09;
    let rho = ScalarField::gaussian(grid, [0.0, 0.0], var).unwrap();
    let zero = NemytskiiSpec::new(3, 1, NemytskiiFamily::Zero, TimeModulation::default()).unwrap();
    assert_eq!(nemytskii_drift(&zero, &rho, 1.0).unwrap().sup_norm(), 0.0);

    let modulation = TimeModulation::new(1.0, vec![(0.0, 2.0)]).unwrap();
    let value = NemytskiiSpec::new(1, 1, NemytskiiFamily::DensityValue { direction: vec![1.0] }, modulation.clone())
        .unwrap();
    let b = nemytskii_drift(&value, &rho, 0.5).unwrap();
    let peak = (2.0 * std::f64::consts::PI * var).powf(-0.5);
    assert_relative_eq!(b.sup_norm(), 2.0 * 0.5 * peak, max_relative = 1e-12);

    let clipped =
        NemytskiiSpec::new(2, 1, NemytskiiFamily::ClippedGradient { cap: 0.5 }, modulation.clone()).unwrap();
    let report = lipschitz_check(&clipped, 0.7, 1000, 3);
    assert!(report.passed(), "{report:?}");
    assert!(report.max_ratio > 0.9 * report.envelope);
    let b = nemytskii_drift(&clipped, &rho, 1.0).unwrap();
    assert!(b.sup_norm() <= 2.0 * 0.5 + 1e-12);

    assert!(matches!(
        NemytskiiSpec::new(6, 1, NemytskiiFamily::Zero, TimeModulation::default()),
        Err(Error::UnsupportedOrder { order: 5, max: 4 })
    ));
    assert!(NemytskiiSpec::new(1, 1, NemytskiiFamily::ClippedGradient { cap: 1.0 }, TimeModulation::default()).is_err());
}

#[test]
fn nemytskii_jet_in_two_dimensions() {
    let grid = GridSpec::new(2, 32, 6.0).unwrap();
    let rho = ScalarField::gaussian(grid, [0.0, 0.0], 0.5).unwrap();
    let jet = density_jet(&rho, 3).unwrap();
    assert_eq!(jet.len(), 1 + 2 + 4);
    // Mixed second derivatives agree.
    assert_eq!(jet[4].values(), jet[5].values());
    let spec = NemytskiiSpec::new(3, 2, NemytskiiFamily::ClippedGradient { cap: 0.05 }, TimeModulation::default())
        .unwrap();
    assert_eq!(spec.jet_len(), 7);
    assert!(lipschitz_check(&spec, 1.0, 1000, 9).passed());
}

#[test]
fn verdict_rule_on_synthetic_sequences() {
    let eps = geometric_eps(1e-2, 1e-5, 10);
    let rows = |f: &dyn Fn(f64) -> f64| eps.iter().map(|&e| NormRow { eps: e, norm: f(e) }).collect::<Vec<_>>();
    let (v, _, _) = boundedness_verdict(&rows(&|e| 3.0 - 2.0 * e.powf(0.3))).unwrap();
    assert_eq!(v, Verdict::Bounded);
    let (v, _, _) = boundedness_verdict(&rows(&|_| 1.5)).unwrap();
    assert_eq!(v, Verdict::Bounded);
    let (v, _, u) = boundedness_verdict(&rows(&|e| 0.5 + 0.2 * e.powf(-0.4))).unwrap();
    assert_eq!(v, Verdict::Unbounded);
    assert!((u.unwrap().power + 0.4).abs() < 0.01);
    assert!(boundedness_verdict(&rows(&|_| 1.0)[..3]).is_err());
}

#[test]
fn dirac_norm_study_threshold() {
    let grid = GridSpec::new(1, 8192, 16.0).unwrap();
    let spec = KernelSpec::stationary(KernelVariant::DiracDerivative { order: 0, direction: vec![1.0] }, 1e-2).unwrap();
    let eps = geometric_eps(1e-2, 2e-5, 10);
    let above = kernel_norm_study(&spec, &grid, SobolevIndex::new(1.5, f64::INFINITY).unwrap(), &eps).unwrap();
    assert_eq!(above.verdict, Verdict::Bounded, "{above:?}");
    let below = kernel_norm_study(&spec, &grid, SobolevIndex::new(0.5, f64::INFINITY).unwrap(), &eps).unwrap();
    assert_eq!(below.verdict, Verdict::Unbounded, "{below:?}");
    let g = below.growth_exponent().unwrap();
    assert!((g - 0.25).abs() < 0.1, "growth exponent {g}");
}

#[test]
fn norm_study_drops_unresolvable_eps() {
    let grid = GridSpec::new(1, 1024, 16.0).unwrap();
    let spec = KernelSpec::stationary(KernelVariant::DiracDerivative { order: 0, direction: vec![1.0] }, 1e-2).unwrap();
    let eps = geometric_eps(1e-1, 1e-6, 12);
    let study = kernel_norm_study(&spec, &grid, SobolevIndex::new(1.5, f64::INFINITY).unwrap(), &eps).unwrap();
    assert!(!study.truncated.is_empty());
    assert_eq!(study.rows.len() + study.truncated.len(), 12);
    assert!(kernel_norm_study(&spec, &grid, SobolevIndex::new(1.5, 2.0).unwrap(), &[0.1, 0.2]).is_err());
}

#[test]
fn riesz_membership_studies() {
    let grid = GridSpec::new(1, 8192, 16.0).unwrap();
    let eps = geometric_eps(1e-2, 2e-5, 10);
    for k in [2.0, 4.0] {
        let spec = riesz(vec![1.0], 0, 0.5, 1e-2);
        let s = kernel_norm_study(&spec, &grid, SobolevIndex::new(1.0, k).unwrap(), &eps).unwrap();
        assert_eq!(s.verdict, Verdict::Bounded, "k={k}: {s:?}");
    }
    let spec = riesz(vec![1.0], 1, 0.5, 1e-2);
    let s = kernel_norm_study(&spec, &grid, SobolevIndex::new(1.0, 2.0).unwrap(), &eps).unwrap();
    assert_eq!(s.verdict, Verdict::Unbounded, "{s:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn convolution_linearity(a in 0.0f64..1.0, m1 in -2.0f64..2.0, m2 in -2.0f64..2.0, v in 0.05f64..0.5) {
        let grid = GridSpec::new(1, 256, 8.0).unwrap();
        let spec = riesz(vec![1.0], 0, 1.5, 0.01);
        let r1 = ScalarField::gaussian(grid, [m1, 0.0], v).unwrap();
        let r2 = ScalarField::gaussian(grid, [m2, 0.0], 2.0 * v).unwrap();
        let mix = r1.combine(a, &r2, 1.0 - a).unwrap();
        let k = PreparedKernel::new(&spec, &grid).unwrap();
        let b1 = k.convolve(&r1).unwrap();
        let b2 = k.convolve(&r2).unwrap();
        let bm = k.convolve(&mix).unwrap();
        let scale = b1.sup_norm().max(b2.sup_norm());
        for j in 0..grid.len() {
            let e = a * b1.component(0)[j] + (1.0 - a) * b2.component(0)[j];
            prop_assert!((bm.component(0)[j] - e).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn odd_kernels_give_odd_drift_on_even_density(n0 in 0u32..2, eps0 in 0.1f64..1.9) {
        let grid = GridSpec::new(1, 256, 8.0).unwrap();
        let rho = ScalarField::gaussian(grid, [0.0, 0.0], 0.3).unwrap();
        let b = drift_from_kernel(&riesz(vec![1.0], n0, eps0, 0.02), &rho, 1.0).unwrap().field;
        let n = grid.points_per_dim();
        let c = b.component(0);
        for j in 1..n {
            prop_assert!((c[j] + c[n - j]).abs() < 1e-9 * b.sup_norm().max(1.0));
        }
    }
}
