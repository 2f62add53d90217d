//! Experiment configuration: one flat TOML table of typed keys.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use mvflow_core::solver::{eta_theta_params, FlowParams};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    HeatExponent,
    KernelMembership,
    Solve,
    Decay,
    Stability,
    EntropyCost,
    Particles,
    BesselIdentity,
    MetricsOracles,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::HeatExponent,
        ExperimentKind::KernelMembership,
        ExperimentKind::Solve,
        ExperimentKind::Decay,
        ExperimentKind::Stability,
        ExperimentKind::EntropyCost,
        ExperimentKind::Particles,
        ExperimentKind::BesselIdentity,
        ExperimentKind::MetricsOracles,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::HeatExponent => "heat_exponent",
            ExperimentKind::KernelMembership => "kernel_membership",
            ExperimentKind::Solve => "solve",
            ExperimentKind::Decay => "decay",
            ExperimentKind::Stability => "stability",
            ExperimentKind::EntropyCost => "entropy_cost",
            ExperimentKind::Particles => "particles",
            ExperimentKind::BesselIdentity => "bessel_identity",
            ExperimentKind::MetricsOracles => "metrics_oracles",
        }
    }

    /// Whether the experiment runs the nonlinear flow and so needs the solver conditions.
    pub fn needs_solver(self) -> bool {
        matches!(
            self,
            ExperimentKind::Solve
                | ExperimentKind::Decay
                | ExperimentKind::Stability
                | ExperimentKind::EntropyCost
                | ExperimentKind::Particles
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|e| e.name() == key)
            .ok_or_else(|| BenchError::Config(format!("unknown experiment '{s}'")))
    }
}

/// Kernel names accepted by `kernel`.
pub const KERNEL_CATALOG: [&str; 6] = ["zero", "constant", "dirac", "riesz_half", "riesz_three_half", "small"];

/// Lebesgue exponent in `[1, ∞]`; written as a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpValue(pub f64);

impl Serialize for ExpValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExpValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(ExpValue(v as f64)),
            Raw::Float(v) => Ok(ExpValue(v)),
            Raw::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Inf") => Ok(ExpValue(f64::INFINITY)),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output_dir: String,

    pub dim: usize,
    /// Grid points per axis; 0 picks the experiment's default.
    pub grid: usize,
    /// Torus side length; 0 picks the experiment's default.
    pub extent: f64,

    /// Derivative order `i` of the heat operator.
    pub order: usize,
    pub delta: f64,
    pub k: ExpValue,
    pub eps: f64,
    pub p: ExpValue,
    pub kappa: f64,
    pub horizon: f64,
    pub time_count: usize,
    pub lambda: f64,
    pub lambdas: Vec<f64>,
    pub max_iterations: usize,
    /// Time window; zeros pick the experiment's default.
    pub t_min: f64,
    pub t_max: f64,
    pub t_count: usize,
    pub probes: usize,

    pub kernel: String,
    /// Kernel amplitude for the non-calibrated catalog kernels.
    pub amplitude: f64,
    /// Kernel mollification time; 0 picks `4h²`.
    pub mollification: f64,
    pub eps_max: f64,
    pub eps_min: f64,
    pub eps_count: usize,

    /// Variance of the Gaussian initial law; 0 picks the experiment's default.
    pub r: f64,
    pub r_list: Vec<f64>,
    pub separations: Vec<f64>,
    /// When positive, `solve` also compares against the time-shift construction at this `r`.
    pub shift_r: f64,

    pub n_list: Vec<usize>,
    pub replicates: usize,
    pub dt: f64,
    pub bandwidth: f64,

    pub bessel_orders: Vec<f64>,
    pub quadrature_nodes: usize,
    pub random_fields: usize,
    pub random_pairs: usize,

    pub tol_heat_slope: f64,
    pub tol_growth: f64,
    pub tol_null_zero: f64,
    pub tol_null_constant: f64,
    pub tol_contraction: f64,
    /// Relative increase of the contraction ratio allowed between successive `lambdas`.
    pub tol_lambda_monotone: f64,
    pub tol_residual: f64,
    pub tol_iterations: f64,
    pub tol_time_shift: f64,
    pub tol_decay_spread: f64,
    pub tol_stability_slope: f64,
    pub tol_linearity: f64,
    pub tol_entropy_zero: f64,
    pub tol_entropy_small: f64,
    pub tol_entropy_match: f64,
    pub tol_bessel: f64,
    pub tol_closed_form: f64,
    pub tol_enumeration: f64,
    /// Roundoff allowed in `TV - √(2 Ent) ≤ 0`.
    pub tol_pinsker: f64,
    pub tol_mc_slope: f64,
    /// Error-bar multiple allowed when checking monotonicity in `N`.
    pub tol_error_bars: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::HeatExponent,
            seed: 0,
            output_dir: "out".into(),
            dim: 1,
            grid: 0,
            extent: 0.0,
            order: 0,
            delta: 1.0,
            k: ExpValue(2.0),
            eps: 0.0,
            p: ExpValue(f64::INFINITY),
            kappa: 0.5,
            horizon: 0.5,
            time_count: 25,
            lambda: 0.0,
            lambdas: vec![0.0, 1.0, 10.0, 100.0],
            max_iterations: 20,
            t_min: 0.0,
            t_max: 0.0,
            t_count: 0,
            probes: 48,
            kernel: "zero".into(),
            amplitude: 1.0,
            mollification: 0.0,
            eps_max: 1e-2,
            eps_min: 2e-5,
            eps_count: 10,
            r: 0.0,
            r_list: vec![0.02, 0.01, 0.005],
            separations: vec![0.02, 0.05, 0.1],
            shift_r: 0.0,
            n_list: vec![250, 1000, 4000],
            replicates: 10,
            dt: 0.01,
            bandwidth: 0.1,
            bessel_orders: vec![0.25, 0.75, 1.5],
            quadrature_nodes: 200,
            random_fields: 5,
            random_pairs: 100,
            tol_heat_slope: 0.08,
            tol_growth: 0.1,
            tol_null_zero: 1e-8,
            tol_null_constant: 1e-6,
            tol_contraction: 0.9,
            tol_lambda_monotone: 1e-9,
            tol_residual: 1e-6,
            tol_iterations: 20.0,
            tol_time_shift: 1e-4,
            tol_decay_spread: 0.2,
            tol_stability_slope: 0.1,
            tol_linearity: 0.1,
            tol_entropy_zero: 0.5,
            tol_entropy_small: 1.0,
            tol_entropy_match: 1e-6,
            tol_bessel: 1e-6,
            tol_closed_form: 1e-6,
            tol_enumeration: 1e-10,
            tol_pinsker: 1e-12,
            tol_mc_slope: 0.15,
            tol_error_bars: 2.0,
        }
    }
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self { experiment, ..Self::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML rendering, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !KERNEL_CATALOG.contains(&self.kernel.as_str()) {
            return Err(BenchError::Config(format!(
                "unknown kernel '{}' (catalog: {})",
                self.kernel,
                KERNEL_CATALOG.join(", ")
            )));
        }
        if self.dim != 1 && self.dim != 2 {
            return Err(BenchError::Config(format!("dim must be 1 or 2, got {}", self.dim)));
        }
        if self.kernel == "small" && self.dim != 1 {
            return Err(BenchError::Config("the calibrated small kernel is one-dimensional".into()));
        }
        if self.experiment.needs_solver() {
            self.admissibility_gate()?;
        }
        Ok(())
    }

    /// Flow indices from the config with output times `times`.
    pub fn flow_params(&self, times: Vec<f64>) -> Result<FlowParams> {
        Ok(FlowParams::new(self.dim, self.eps, self.p.0, self.delta, self.k.0, self.kappa, times, self.lambda)?)
    }

    /// Refuses indices that violate the conditions of the solver's existence result.
    pub fn admissibility_gate(&self) -> Result<()> {
        let params = self.flow_params(FlowParams::uniform_times(self.horizon, self.time_count.max(1)))?;
        let adm = eta_theta_params(&params, None);
        if let Some(reason) = adm.solver_violation(self.kappa) {
            return Err(BenchError::Inadmissible(reason));
        }
        if self.kernel == "small" {
            let calibrated = self.delta == 1.0
                && self.k.0 == 2.0
                && self.eps == 0.0
                && self.p.0.is_infinite()
                && self.kappa == 0.5;
            if !calibrated {
                return Err(BenchError::Config(
                    "the small kernel is calibrated at delta = 1, k = 2, eps = 0, p = inf, kappa = 0.5".into(),
                ));
            }
        }
        Ok(())
    }
}
