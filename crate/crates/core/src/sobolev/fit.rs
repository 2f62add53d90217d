use crate::error::{invalid, Result};

/// Least-squares line through `(ln t, ln value)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl PowerFit {
    /// `exp(intercept) * t^slope`.
    pub fn predict(&self, t: f64) -> f64 {
        (self.intercept + self.slope * t.ln()).exp()
    }
}

/// Ordinary least squares in log-log coordinates; needs at least four positive pairs.
pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<PowerFit> {
    if pairs.len() < 4 {
        return invalid(format!("power-law fit needs at least 4 points, got {}", pairs.len()));
    }
    if let Some((t, v)) = pairs.iter().find(|(t, v)| !(*t > 0.0) || !(*v > 0.0) || !t.is_finite() || !v.is_finite()) {
        return invalid(format!("power-law fit needs positive finite data, got ({t}, {v})"));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r_squared) = linear_regression(&xs, &ys)?;
    Ok(PowerFit { slope, intercept, r_squared })
}

/// `(slope, intercept, r²)` of `y ≈ a x + b`.
pub fn linear_regression(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return invalid("regression abscissae are all equal");
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { (sxy * sxy / (sxx * syy)).min(1.0) } else { 1.0 };
    Ok((slope, intercept, r_squared))
}
