use crate::error::{invalid, Result};
use crate::sobolev::{Exponent, SobolevIndex};

/// Indices and horizon of a measure-flow solve.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowParams {
    /// Regularity index `ε` of the initial law.
    pub eps: f64,
    pub p: Exponent,
    /// Sobolev index `δ` of the kernel space.
    pub delta: f64,
    pub k: Exponent,
    pub kappa: f64,
    pub horizon: f64,
    /// Output times in `(0, T]`, strictly increasing, ending at `T`.
    pub time_grid: Vec<f64>,
    /// Weight `λ` of the metric `sup_t e^{-λt} t^{η/2} ‖μ_t - ν_t‖`.
    pub lambda: f64,
    pub dim: usize,
}

impl FlowParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dim: usize,
        eps: f64,
        p: f64,
        delta: f64,
        k: f64,
        kappa: f64,
        time_grid: Vec<f64>,
        lambda: f64,
    ) -> Result<Self> {
        let p = Exponent::new(p)?;
        let k = Exponent::new(k)?;
        if dim != 1 && dim != 2 {
            return invalid(format!("dimension must be 1 or 2, got {dim}"));
        }
        if !(eps >= 0.0) || !(delta >= eps) || !delta.is_finite() {
            return invalid(format!("need 0 <= eps <= delta, got eps = {eps}, delta = {delta}"));
        }
        if p.reciprocal() > k.reciprocal() {
            return invalid(format!("need k <= p, got k = {k}, p = {p}"));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return invalid(format!("kappa must be finite and >= 0, got {kappa}"));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return invalid(format!("lambda must be finite and >= 0, got {lambda}"));
        }
        if time_grid.is_empty() || !(time_grid[0] > 0.0) || time_grid.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("time grid must be positive and strictly increasing");
        }
        let horizon = *time_grid.last().expect("nonempty");
        if !horizon.is_finite() {
            return invalid("time grid must be finite");
        }
        Ok(Self { eps, p, delta, k, kappa, horizon, time_grid, lambda, dim })
    }

    /// `count` equally spaced output times ending at `horizon`.
    pub fn uniform_times(horizon: f64, count: usize) -> Vec<f64> {
        (1..=count).map(|i| horizon * i as f64 / count as f64).collect()
    }

    /// `count` geometrically spaced output times from `first` to `horizon`.
    pub fn geometric_times(first: f64, horizon: f64, count: usize) -> Vec<f64> {
        if count < 2 {
            return vec![horizon];
        }
        let r = (horizon / first).powf(1.0 / (count - 1) as f64);
        let mut t: Vec<f64> = (0..count).map(|i| first * r.powi(i as i32)).collect();
        t[count - 1] = horizon;
        t
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..self.clone() }
    }

    pub fn with_time_grid(&self, time_grid: Vec<f64>) -> Result<Self> {
        Self::new(
            self.dim,
            self.eps,
            self.p.value(),
            self.delta,
            self.k.value(),
            self.kappa,
            time_grid,
            self.lambda,
        )
    }

    /// Index `(δ, k)` of the norms along the flow.
    pub fn flow_index(&self) -> SobolevIndex {
        SobolevIndex { delta: self.delta, k: self.k }
    }

    /// Index `(ε, p)` of the initial law.
    pub fn initial_index(&self) -> SobolevIndex {
        SobolevIndex { delta: self.eps, k: self.p }
    }

    /// `d(p - k)/(pk) = d(1/k - 1/p)`.
    fn integrability_gap(&self) -> f64 {
        self.dim as f64 * (self.k.reciprocal() - self.p.reciprocal())
    }

    /// `η = δ - ε + d(p - k)/(pk)`.
    pub fn eta(&self) -> f64 {
        self.delta - self.eps + self.integrability_gap()
    }

    /// Whether `(ε, p) = (0, ∞)`, the case with global bounds.
    pub fn is_rough_global(&self) -> bool {
        self.eps == 0.0 && self.p.is_infinite()
    }
}

/// Derived exponents and the admissibility conditions of the well-posedness and regularity results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility {
    pub eta: f64,
    /// `2 / (1 - (η - 2κ)^+)`; infinite when `η ≥ 1 + 2κ`.
    pub theta: f64,
    /// `ξ(q)` when a `q` was supplied.
    pub xi: Option<f64>,
    /// `η < 1 + 2κ`.
    pub existence: bool,
    /// `η < 1 ∨ (1/2 + κ)`, `δ < 1 ∧ (2 - d/k) + (2κ - η)^+`, `ε ≤ δ ∧ d(p-1)/p`.
    pub regularity: bool,
    /// The window on `q` (when supplied).
    pub q_window: Option<bool>,
}

impl Admissibility {
    /// Human-readable name of the first violated solver condition, if any.
    pub fn solver_violation(&self, kappa: f64) -> Option<String> {
        if !self.existence {
            return Some(format!("existence condition fails: eta = {} >= 1 + 2 kappa = {}", self.eta, 1.0 + 2.0 * kappa));
        }
        None
    }
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

/// `η`, `θ`, optionally `ξ(q)`, and the condition flags. Never rejects: violations are flagged.
pub fn eta_theta_params(params: &FlowParams, q: Option<f64>) -> Admissibility {
    let eta = params.eta();
    let kappa = params.kappa;
    let d = params.dim as f64;
    let existence = eta < 1.0 + 2.0 * kappa;
    let theta = if existence { 2.0 / (1.0 - pos(eta - 2.0 * kappa)) } else { f64::INFINITY };
    let inv_k = params.k.reciprocal();
    let inv_p = params.p.reciprocal();
    let eps_cap = params.delta.min(d * (1.0 - inv_p));
    let regularity = params.eps <= eps_cap
        && eta < 1f64.max(0.5 + kappa)
        && params.delta < 1f64.min(2.0 - d * inv_k) + pos(2.0 * kappa - eta);
    let xi = q.map(|q| params.delta + d * inv_k - (q - 1.0) * (d * inv_p + params.eps) / q);
    let q_window = q.map(|q| {
        let num = params.eps + d * inv_p;
        let lower = num / (1.0 + pos(2.0 * kappa - eta) - eta);
        let den = pos(params.eps + d * inv_p - d * inv_k);
        let upper = if den <= 0.0 { f64::INFINITY } else { num / den };
        q >= 1.0 && q > lower && q <= upper
    });
    Admissibility { eta, theta, xi, existence, regularity, q_window }
}

/// Lifetime lower bound `τ_n`: `n` when `(ε, p) = (0, ∞)`, else `min{n, (A x e^{A x})^{-1}}`
/// with `x = ‖γ‖^θ`. `A_n` is supplied by the caller.
pub fn tau_n_formula(gamma_norm: f64, n: u32, a_n: f64, params: &FlowParams) -> Result<f64> {
    if !(a_n > 0.0) || !(gamma_norm > 0.0) {
        return invalid("tau_n needs A_n > 0 and a positive norm of gamma");
    }
    if n == 0 {
        return invalid("tau_n needs n >= 1");
    }
    if params.is_rough_global() {
        return Ok(n as f64);
    }
    let theta = eta_theta_params(params, None).theta;
    let x = a_n * gamma_norm.powf(theta);
    Ok((n as f64).min(1.0 / (x * x.exp())))
}
