use rayon::prelude::*;

use super::realize::PreparedKernel;
use super::spec::KernelSpec;
use crate::error::{invalid, Result};
use crate::scalar::{cst, to_f64, Real};
use crate::sobolev::{local_neg_norm_vector, BallLattice, SobolevIndex};
use crate::spectral::GridSpec;

/// Smallest growth exponent `g` in `N ≈ D + C ε^{-g}` accepted as genuine blow-up.
pub const MIN_GROWTH_EXPONENT: f64 = 0.05;

const EXPONENT_GRID_MAX: f64 = 3.0;
const EXPONENT_GRID_STEP: f64 = 0.0025;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Bounded,
    Unbounded,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded",
            Verdict::Unbounded => "unbounded",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `N(ε) ≈ offset + coef · ε^{power}` fitted with relative weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelFit {
    pub offset: f64,
    pub coef: f64,
    pub power: f64,
    /// Weighted residual sum of squares (residuals relative to `N`).
    pub rss: f64,
}

impl ModelFit {
    pub fn predict(&self, eps: f64) -> f64 {
        self.offset + self.coef * eps.powf(self.power)
    }

    /// Akaike criterion for three parameters and Gaussian residuals.
    pub fn aic(&self, n: usize) -> f64 {
        let n = n as f64;
        n * (self.rss / n).max(1e-300).ln() + 6.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormRow {
    pub eps: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormStudy {
    pub rows: Vec<NormRow>,
    pub verdict: Verdict,
    /// `N ≈ N_∞ + b ε^{p}`, `p > 0`.
    pub bounded_fit: ModelFit,
    /// `N ≈ D + C ε^{-g}`, `C > 0`; `power` holds `-g`.
    pub unbounded_fit: Option<ModelFit>,
    /// Requested ε values dropped as unresolvable on the grid.
    pub truncated: Vec<f64>,
}

impl NormStudy {
    /// `g` of the unbounded model when that model wins.
    pub fn growth_exponent(&self) -> Option<f64> {
        match (self.verdict, self.unbounded_fit) {
            (Verdict::Unbounded, Some(f)) => Some(-f.power),
            _ => None,
        }
    }
}

fn weighted_line(xs: &[f64], ys: &[f64], ws: &[f64]) -> (f64, f64, f64) {
    let sw: f64 = ws.iter().sum();
    let mx = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(ws).map(|(x, w)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).zip(ws).map(|((x, y), w)| w * (x - mx) * (y - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let rss = xs.iter().zip(ys).zip(ws).map(|((x, y), w)| w * (y - a - b * x).powi(2)).sum();
    (a, b, rss)
}

fn best_fit(rows: &[NormRow], sign: f64, require_positive_coef: bool) -> Option<ModelFit> {
    let ys: Vec<f64> = rows.iter().map(|r| r.norm).collect();
    let ws: Vec<f64> = ys.iter().map(|y| 1.0 / y.abs().max(1e-300).powi(2)).collect();
    let steps = (EXPONENT_GRID_MAX / EXPONENT_GRID_STEP) as usize;
    let mut best: Option<ModelFit> = None;
    for s in 1..=steps {
        let power = sign * s as f64 * EXPONENT_GRID_STEP;
        let xs: Vec<f64> = rows.iter().map(|r| r.eps.powf(power)).collect();
        let (offset, coef, rss) = weighted_line(&xs, &ys, &ws);
        if require_positive_coef && coef <= 0.0 {
            continue;
        }
        if best.is_none_or(|b| rss < b.rss) {
            best = Some(ModelFit { offset, coef, power, rss });
        }
    }
    best
}

/// Chooses between stabilization and power-law growth of `N(ε)` as `ε ↓ 0`.
///
/// Both models have three parameters, so the lower AIC is the lower residual; growth also
/// needs an exponent of at least [`MIN_GROWTH_EXPONENT`].
pub fn boundedness_verdict(rows: &[NormRow]) -> Result<(Verdict, ModelFit, Option<ModelFit>)> {
    if rows.len() < 4 {
        return invalid(format!("need at least 4 norms for a verdict, got {}", rows.len()));
    }
    if rows.iter().any(|r| !(r.eps > 0.0) || !r.norm.is_finite()) {
        return invalid("norm study rows must have positive eps and finite norms");
    }
    let bounded = best_fit(rows, 1.0, false).expect("bounded model always fits");
    let unbounded = best_fit(rows, -1.0, true);
    let n = rows.len();
    let verdict = match unbounded {
        Some(u) if -u.power >= MIN_GROWTH_EXPONENT && u.aic(n) < bounded.aic(n) && u.rss < bounded.rss => {
            Verdict::Unbounded
        }
        _ => Verdict::Bounded,
    };
    Ok((verdict, bounded, unbounded))
}

/// `‖h_ε‖_{W̃^{-δ,k}}` along a strictly decreasing list of mollification times, with a verdict.
pub fn kernel_norm_study<T: Real>(
    spec: &KernelSpec<T>,
    grid: &GridSpec<T>,
    idx: SobolevIndex,
    eps_list: &[f64],
) -> Result<NormStudy> {
    if eps_list.windows(2).any(|w| w[1] >= w[0]) || eps_list.iter().any(|e| !(*e > 0.0)) {
        return invalid("eps_list must be positive and strictly decreasing");
    }
    let lattice = BallLattice::new(grid)?;
    let (kept, truncated): (Vec<f64>, Vec<f64>) =
        eps_list.iter().partition(|&&e| grid.resolves_heat_time(cst(e)));
    if !truncated.is_empty() {
        log::warn!(
            "norm study: dropping {} unresolvable eps values (smallest kept {:?})",
            truncated.len(),
            kept.last()
        );
    }
    let rows: Vec<NormRow> = kept
        .par_iter()
        .map(|&eps| {
            let s = spec.with_mollification(eps)?;
            let field = PreparedKernel::new(&s, grid)?.realize();
            Ok(NormRow { eps, norm: to_f64(local_neg_norm_vector(&field, idx, &lattice)) })
        })
        .collect::<Result<_>>()?;
    let (verdict, bounded_fit, unbounded_fit) = boundedness_verdict(&rows)?;
    Ok(NormStudy { rows, verdict, bounded_fit, unbounded_fit, truncated })
}

/// `count` values spaced geometrically from `largest` down to `smallest`.
pub fn geometric_eps(largest: f64, smallest: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![largest];
    }
    let r = (smallest / largest).powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| largest * r.powi(i as i32)).collect()
}
