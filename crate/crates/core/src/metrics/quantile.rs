use crate::error::{invalid, Error, Result};
use crate::scalar::{to_f64, Real};
use crate::spectral::ScalarField;

/// A 1D quantile function `u ↦ F^{-1}(u)` that is linear on each piece.
///
/// Grid densities are read as constant on each cell `[x_j - h/2, x_j + h/2]` of the interval
/// `[-L/2, L/2]`; atoms give flat pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileFunction {
    /// `(u_end, x_start, x_end)` per piece; pieces start where the previous one ended (first at 0).
    pieces: Vec<(f64, f64, f64)>,
}

impl QuantileFunction {
    pub fn from_density<T: Real>(rho: &ScalarField<T>) -> Result<Self> {
        let grid = rho.grid();
        if grid.dim() != 1 {
            return Err(Error::WrongDimension { expected: 1, got: grid.dim() });
        }
        let h = to_f64(grid.spacing());
        let masses: Vec<f64> = rho.values().iter().map(|v| to_f64(*v).max(0.0)).collect();
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return invalid("density has no positive mass");
        }
        let mut pieces = Vec::with_capacity(masses.len());
        let mut u = 0.0;
        for (j, m) in masses.iter().enumerate() {
            if *m == 0.0 {
                continue;
            }
            u += m / total;
            let x = to_f64(grid.coord(j));
            pieces.push((u, x - 0.5 * h, x + 0.5 * h));
        }
        Self::finish(pieces)
    }

    /// Atomic measure `Σ w_i δ_{x_i}`; weights are normalized.
    pub fn from_atoms(points: &[f64], weights: &[f64]) -> Result<Self> {
        if points.len() != weights.len() || points.is_empty() {
            return invalid("atoms need matching, nonempty point and weight lists");
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || points.iter().any(|x| !x.is_finite()) {
            return invalid("atom weights must be nonnegative and points finite");
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return invalid("atoms have zero total weight");
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
        let mut u = 0.0;
        let mut pieces = Vec::with_capacity(points.len());
        for i in order {
            if weights[i] == 0.0 {
                continue;
            }
            u += weights[i] / total;
            pieces.push((u, points[i], points[i]));
        }
        Self::finish(pieces)
    }

    fn finish(mut pieces: Vec<(f64, f64, f64)>) -> Result<Self> {
        if let Some(last) = pieces.last_mut() {
            last.0 = 1.0;
        }
        Ok(Self { pieces })
    }

    pub fn eval(&self, u: f64) -> f64 {
        let k = self.pieces.partition_point(|p| p.0 < u).min(self.pieces.len() - 1);
        let u0 = if k == 0 { 0.0 } else { self.pieces[k - 1].0 };
        let (u1, x0, x1) = self.pieces[k];
        if u1 > u0 {
            x0 + (x1 - x0) * ((u - u0) / (u1 - u0)).clamp(0.0, 1.0)
        } else {
            x0
        }
    }
}

/// `∫_0^1 |y(s)|^q ds` for `y` linear from `y0` to `y1`.
fn mean_abs_power(y0: f64, y1: f64, q: f64) -> f64 {
    if y0 == y1 {
        return y0.abs().powf(q);
    }
    if y0 * y1 < 0.0 {
        let s = y0 / (y0 - y1);
        return (s * y0.abs().powf(q) + (1.0 - s) * y1.abs().powf(q)) / (q + 1.0);
    }
    let (a, b) = (y0.abs(), y1.abs());
    if (a - b).abs() < 1e-14 * a.max(b) {
        return a.powf(q);
    }
    (b.powf(q + 1.0) - a.powf(q + 1.0)) / ((q + 1.0) * (b - a))
}

/// `(∫_0^1 |F_1^{-1} - F_2^{-1}|^q du)^{1/q}`, integrated exactly piece by piece.
pub fn wasserstein_quantile(f: &QuantileFunction, g: &QuantileFunction, q: f64) -> Result<f64> {
    if !(q >= 1.0) || !q.is_finite() {
        return invalid(format!("Wasserstein order must be finite and >= 1, got {q}"));
    }
    let mut acc = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    let mut u = 0.0;
    while i < f.pieces.len() && j < g.pieces.len() {
        let end = f.pieces[i].0.min(g.pieces[j].0);
        if end > u {
            let a = f.eval_on(i, u, end);
            let b = g.eval_on(j, u, end);
            acc += (end - u) * mean_abs_power(a.0 - b.0, a.1 - b.1, q);
            u = end;
        }
        if f.pieces[i].0 <= end {
            i += 1;
        }
        if g.pieces[j].0 <= end {
            j += 1;
        }
    }
    Ok(acc.max(0.0).powf(1.0 / q))
}

impl QuantileFunction {
    /// Values of piece `k` at the ends of the sub-interval `[ua, ub]`.
    fn eval_on(&self, k: usize, ua: f64, ub: f64) -> (f64, f64) {
        let u0 = if k == 0 { 0.0 } else { self.pieces[k - 1].0 };
        let (u1, x0, x1) = self.pieces[k];
        let at = |u: f64| if u1 > u0 { x0 + (x1 - x0) * ((u - u0) / (u1 - u0)) } else { x0 };
        (at(ua), at(ub))
    }
}

/// `W_q` between two 1D grid densities.
pub fn wasserstein_1d<T: Real>(rho1: &ScalarField<T>, rho2: &ScalarField<T>, q: f64) -> Result<f64> {
    crate::spectral::ensure_same_grid(rho1.grid(), rho2.grid())?;
    let f = QuantileFunction::from_density(rho1)?;
    let g = QuantileFunction::from_density(rho2)?;
    wasserstein_quantile(&f, &g, q)
}
