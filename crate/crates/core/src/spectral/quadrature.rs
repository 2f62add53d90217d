//! Gauss–Legendre rules and the Gamma-weighted rule behind the Bessel potential.

use crate::error::{invalid, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(&w).map(|(xi, wi)| (mid + half * xi, half * wi)).collect()
}

/// Nodes `s_j` and weights `w_j` with
/// `sum_j w_j g(s_j) ≈ Γ(r)^{-1} ∫_0^∞ s^{r-1} e^{-s} g(s) ds`
/// for `g` bounded and smooth on `(0, ∞)`.
///
/// The first panel `(0, s0]` uses `u = s^r`, which removes the `s^{r-1}` factor;
/// the remaining range is split into panels of geometric width up to the point
/// where `e^{-s} s^{r-1}` drops below `1e-16`.
#[derive(Debug, Clone)]
pub struct GammaRule {
    pub order: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

const FIRST_PANEL_END: f64 = 1.0 / 16_777_216.0;
const TAIL_LEVEL: f64 = 1e-16;

impl GammaRule {
    pub fn new(r: f64, total_nodes: usize) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return invalid(format!("gamma quadrature needs r > 0, got {r}"));
        }
        let s_max = tail_cutoff(r);
        let mut edges = vec![0.0, FIRST_PANEL_END];
        while *edges.last().unwrap() < s_max {
            let next = (edges.last().unwrap() * 2.0).min(s_max);
            edges.push(next);
        }
        let panels = edges.len() - 1;
        if total_nodes < 2 * panels {
            return invalid(format!(
                "gamma quadrature needs at least {} nodes for r = {r}",
                2 * panels
            ));
        }
        let base = total_nodes / panels;
        let extra = total_nodes % panels;
        let inv_gamma = 1.0 / libm::tgamma(r);
        let mut nodes = Vec::with_capacity(total_nodes);
        let mut weights = Vec::with_capacity(total_nodes);
        for p in 0..panels {
            // Spare nodes go to the panels nearest s ~ 1 where the integrand has most mass.
            let m = base + usize::from(p >= panels - extra);
            let (a, b) = (edges[p], edges[p + 1]);
            if p == 0 {
                // ∫_0^{b} s^{r-1} e^{-s} g ds = r^{-1} ∫_0^{b^r} e^{-s} g du, s = u^{1/r}.
                for (u, w) in gauss_legendre_on(m, 0.0, b.powf(r)) {
                    let s = u.powf(1.0 / r);
                    nodes.push(s);
                    weights.push(inv_gamma * w * (-s).exp() / r);
                }
            } else {
                for (s, w) in gauss_legendre_on(m, a, b) {
                    nodes.push(s);
                    weights.push(inv_gamma * w * s.powf(r - 1.0) * (-s).exp());
                }
            }
        }
        Ok(Self { order: r, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&s, &w)| w * g(s)).sum()
    }
}

/// Smallest `s >= max(1, r)` with `e^{-s} s^{r-1} < 1e-16`.
fn tail_cutoff(r: f64) -> f64 {
    let f = |s: f64| -s + (r - 1.0) * s.ln() - TAIL_LEVEL.ln();
    let mut lo = r.max(1.0);
    if f(lo) < 0.0 {
        return lo;
    }
    let mut hi = lo * 2.0 + 40.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
