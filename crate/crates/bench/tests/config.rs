use mvflow_bench::{fit_exponent, run_experiment, BenchError, ExpValue, ExperimentConfig, ExperimentKind};

#[test]
fn toml_accepts_inf_and_integers() {
    let cfg = ExperimentConfig::from_toml("experiment = \"heat_exponent\"\nk = \"inf\"\np = 2\ndelta = 0.5\n").unwrap();
    assert_eq!(cfg.k, ExpValue(f64::INFINITY));
    assert_eq!(cfg.p, ExpValue(2.0));
    assert_eq!(cfg.delta, 0.5);
    assert_eq!(cfg.experiment, ExperimentKind::HeatExponent);
}

#[test]
fn toml_round_trips() {
    let cfg = ExperimentConfig { seed: 9, kernel: "riesz_half".into(), ..ExperimentConfig::new(ExperimentKind::KernelMembership) };
    let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.hash(), cfg.hash());
    assert_ne!(ExperimentConfig { seed: 10, ..cfg.clone() }.hash(), cfg.hash());
}

#[test]
fn bad_configs_are_rejected() {
    assert!(matches!(ExperimentConfig::from_toml("gird = 64\n"), Err(BenchError::Config(_))));
    assert!(ExperimentConfig::from_toml("k = \"big\"\n").is_err());
    assert!(ExperimentConfig::from_toml("dim = 3\n").is_err());
    assert!(ExperimentConfig::from_toml("kernel = \"small\"\ndim = 2\n").is_err());
    assert!(ExperimentConfig::from_toml("experiment = \"solve\"\nkernel = \"small\"\ndelta = 0.5\n").is_err());
    let err = ExperimentConfig::from_toml("experiment = \"solve\"\ndelta = 1.5\nk = 1\nkappa = 0.0\n").unwrap_err();
    assert!(matches!(err, BenchError::Inadmissible(_)));
}

#[test]
fn experiment_names_parse() {
    for kind in ExperimentKind::ALL {
        assert_eq!(kind.name().parse::<ExperimentKind>().unwrap(), kind);
        assert_eq!(kind.name().replace('_', "-").parse::<ExperimentKind>().unwrap(), kind);
    }
    assert!("heat".parse::<ExperimentKind>().is_err());
}

#[test]
fn fit_recovers_exact_and_noisy_power_laws() {
    let ts: Vec<f64> = (0..10).map(|i| 0.01 * 100f64.powf(i as f64 / 9.0)).collect();
    let exact: Vec<(f64, f64)> = ts.iter().map(|&t| (t, 2.0 * t.powf(-0.75))).collect();
    let fit = fit_exponent(&exact).unwrap();
    assert!((fit.slope + 0.75).abs() < 1e-12);
    assert!((fit.intercept - 2f64.ln()).abs() < 1e-12);

    let noisy: Vec<(f64, f64)> =
        ts.iter().enumerate().map(|(i, &t)| (t, t.powf(-0.75) * if i % 2 == 0 { 1.01 } else { 0.99 })).collect();
    assert!((fit_exponent(&noisy).unwrap().slope + 0.75).abs() < 0.02);

    let flat: Vec<(f64, f64)> = ts.iter().map(|&t| (t, 3.0)).collect();
    assert!(fit_exponent(&flat).unwrap().slope.abs() < 1e-12);
    assert!(fit_exponent(&exact[..3]).is_err());
}

#[test]
fn identical_configs_give_identical_reports() {
    let cfg = ExperimentConfig { grid: 128, time_count: 6, ..ExperimentConfig::new(ExperimentKind::Solve) };
    let mut a = run_experiment(&cfg).unwrap();
    let mut b = run_experiment(&cfg).unwrap();
    a.provenance.timestamp = 0;
    b.provenance.timestamp = 0;
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());

    let m = ExperimentConfig { seed: 4, ..ExperimentConfig::new(ExperimentKind::MetricsOracles) };
    let mut a = run_experiment(&m).unwrap();
    let mut b = run_experiment(&m).unwrap();
    a.provenance.timestamp = 0;
    b.provenance.timestamp = 0;
    assert_eq!(a, b);
}
