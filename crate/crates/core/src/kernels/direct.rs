//! Pointwise evaluation of kernels away from the origin, used to cross-check the symbol route.

use super::spec::{KernelSpec, KernelVariant};
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::spectral::quadrature::{gauss_legendre, gauss_legendre_on};

/// `h(z) = diag(c) z / |z|^{d+β}`.
pub fn riesz_pointwise(c: &[f64], beta: f64, z: [f64; 2]) -> [f64; 2] {
    let d = c.len();
    let r2: f64 = z[..d].iter().map(|v| v * v).sum();
    let r = r2.sqrt();
    let scale = r.powf(-(d as f64 + beta));
    let mut out = [0.0; 2];
    for i in 0..d {
        out[i] = c[i] * z[i] * scale;
    }
    out
}

/// Sum of `h` over the periodic images `z + mL`, `m ≠ 0`, paired symmetrically.
///
/// In 1D the images `|m| ≤ images` are summed exactly and the rest is integrated in closed form;
/// in 2D the square `max|m_i| ≤ images` is summed.
pub fn riesz_image_sum(c: &[f64], beta: f64, z: [f64; 2], extent: f64, images: usize) -> [f64; 2] {
    let d = c.len();
    let mut out = [0.0; 2];
    if d == 1 {
        let x = z[0];
        let h = |u: f64| u.signum() * u.abs().powf(-beta);
        let mut s = 0.0;
        for m in 1..=images {
            let ml = m as f64 * extent;
            s += h(x + ml) + h(x - ml);
        }
        // ∫_{a}^{∞} [h(x + uL) + h(x - uL)] du with a = images + 1/2.
        let a = (images as f64 + 0.5) * extent;
        let tail = if (beta - 1.0).abs() < 1e-12 {
            -((a + x).ln() - (a - x).ln()) / extent
        } else {
            -((a + x).powf(1.0 - beta) - (a - x).powf(1.0 - beta)) / (extent * (1.0 - beta))
        };
        out[0] = c[0] * (s + tail);
    } else {
        // Remaining images as an integral over the exterior of the square Q_R:
        // ∫_{ext} h(z + y) dy ≈ ∫_{ext} (z·∇)h(y) dy = -Σ_j z_j ∮_{∂Q_R} h n_j dS.
        let r = (images as f64 + 0.5) * extent;
        let rule = gauss_legendre_on(24, -r, r);
        for (s, w) in rule {
            for (y, normal) in [([r, s], [1.0, 0.0]), ([-r, s], [-1.0, 0.0]), ([s, r], [0.0, 1.0]), ([s, -r], [0.0, -1.0])] {
                let hv = riesz_pointwise(c, beta, y);
                let zn = z[0] * normal[0] + z[1] * normal[1];
                out[0] -= w * hv[0] * zn / (extent * extent);
                out[1] -= w * hv[1] * zn / (extent * extent);
            }
        }
        let m = images as i64;
        for m0 in -m..=m {
            for m1 in -m..=m {
                if m0 == 0 && m1 == 0 {
                    continue;
                }
                let v = riesz_pointwise(c, beta, [z[0] + m0 as f64 * extent, z[1] + m1 as f64 * extent]);
                out[0] += v[0];
                out[1] += v[1];
            }
        }
    }
    out
}

fn gaussian(x: f64, var: f64) -> f64 {
    (-x * x / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Composite Gauss–Legendre over consecutive breakpoints.
fn integrate_panels<F: Fn(f64) -> f64>(f: F, breaks: &[f64], nodes: &[(f64, f64)]) -> f64 {
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        acc += half * nodes.iter().map(|&(x, wt)| wt * f(mid + half * x)).sum::<f64>();
    }
    acc
}

/// 1D heat-mollified Riesz-order kernel `(P_ε h)(z)` for `h(z) = sign(z)|z|^{-β}`, `β < 4`,
/// read as a Hadamard finite part when `β ≥ 2` (a logarithmic one at `β = 2`). No periodization.
pub fn riesz_mollified_1d(beta: f64, z: f64, eps: f64) -> f64 {
    let sigma = eps.sqrt();
    let x = z.abs();
    let sign = if z < 0.0 { -1.0 } else { 1.0 };
    let gp = -x / eps * gaussian(x, eps);
    // h_ε(x) = ∫_0^∞ u^{-β} [g(x-u) - g(x+u)] du, minus -2u g'(x) on [0, s] when β ≥ 2.
    let upper = x + 14.0 * sigma;
    let start = (x - 14.0 * sigma).max(0.0);
    let knee = if start > 0.0 { start } else { 0.25 * sigma.min(x.max(sigma)) };
    let s = if beta >= 2.0 { knee.min(1.0) } else { 0.0 };
    let mut breaks = Vec::new();
    let mut a = knee;
    for _ in 0..60 {
        breaks.push(a);
        a *= 0.5;
    }
    breaks.push(0.0);
    breaks.reverse();
    let width = 0.25 * sigma;
    let mut b = knee;
    while b < upper {
        b = (b + width).min(upper);
        breaks.push(b);
    }
    let nodes: Vec<(f64, f64)> = {
        let (xs, ws) = gauss_legendre(16);
        xs.into_iter().zip(ws).collect()
    };
    let gppp = (3.0 * x / (eps * eps) - x.powi(3) / eps.powi(3)) * gaussian(x, eps);
    let integrand = |u: f64| {
        // Below 1e-3 σ the difference is replaced by its Taylor series to avoid cancellation.
        let mut v = if u < 1e-3 * sigma {
            -2.0 * u * gp - u.powi(3) / 3.0 * gppp
        } else {
            gaussian(x - u, eps) - gaussian(x + u, eps)
        };
        if u < s {
            v += 2.0 * u * gp;
        }
        v * u.powf(-beta)
    };
    let mut val = integrate_panels(integrand, &breaks, &nodes);
    if beta >= 2.0 {
        let fp = if (beta - 2.0).abs() < 1e-12 { s.ln() } else { s.powf(2.0 - beta) / (2.0 - beta) };
        val += -2.0 * gp * fp;
    }
    sign * val
}

/// `P_ε h` for `h = diag(c) z |z|^{-(d+β)}` by its large-`|z|` expansion
/// `Σ_k (ε/2)^k Δ^k h / k!`, with `Δ(z r^{-a}) = a(a-d) z r^{-a-2}`. Accurate when `|z| ≫ √ε`.
pub fn riesz_mollified_far(c: &[f64], beta: f64, z: [f64; 2], eps: f64, terms: usize) -> [f64; 2] {
    let d = c.len() as f64;
    let r2: f64 = z[..c.len()].iter().map(|v| v * v).sum();
    let base = riesz_pointwise(c, beta, z);
    let mut a = d + beta;
    let mut coef = 1.0;
    let mut total = 1.0;
    for k in 1..=terms {
        coef *= a * (a - d) * (eps / 2.0) / (k as f64 * r2);
        total += coef;
        a += 2.0;
    }
    [base[0] * total, base[1] * total]
}

/// Periodized heat kernel `N(0, ε)` and its first two derivatives along each axis, 1D.
fn periodized_gaussian_derivs(x: f64, eps: f64, extent: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    let reach = (12.0 * eps.sqrt() / extent).ceil() as i64 + 1;
    for m in -reach..=reach {
        let y = x + m as f64 * extent;
        let g = gaussian(y, eps);
        out[0] += g;
        out[1] += -y / eps * g;
        out[2] += (y * y / (eps * eps) - 1.0 / eps) * g;
    }
    out
}

/// Direct-route value of the periodized mollified kernel at displacement `z`, for cross-checks.
///
/// Riesz-order kernels use the 1D quadrature (any `|z| > 0`) or the 2D far-field expansion
/// (needs `|z| ≳ 20√ε`); Dirac derivatives use the periodized Gaussian.
pub fn direct_kernel_value<T: Real>(spec: &KernelSpec<T>, z: [f64; 2], extent: f64) -> Result<[f64; 2]> {
    let eps = spec.mollification;
    match &spec.variant {
        KernelVariant::RieszOrder { c, n0, eps0 } => {
            if eps == 0.0 {
                return Err(Error::RequiresMollification);
            }
            let beta = 2.0 * *n0 as f64 + eps0;
            if beta >= 4.0 {
                return Err(Error::Unsupported("direct route needs 2 n0 + eps0 < 4".into()));
            }
            let images = riesz_image_sum(c, beta, z, extent, if c.len() == 1 { 64 } else { 24 });
            if c.len() == 1 {
                Ok([c[0] * riesz_mollified_1d(beta, z[0], eps) + images[0], 0.0])
            } else {
                let near = riesz_mollified_far(c, beta, z, eps, 6);
                Ok([near[0] + images[0], near[1] + images[1]])
            }
        }
        KernelVariant::DiracDerivative { order, direction } => {
            let d = direction.len();
            let norm: f64 = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
            let e: Vec<f64> = direction.iter().map(|v| v / norm).collect();
            let g: Vec<[f64; 3]> = (0..d).map(|i| periodized_gaussian_derivs(z[i], eps, extent)).collect();
            let val = match (d, order) {
                (1, k) => g[0][*k as usize] * e[0].powi(*k as i32),
                (_, 0) => g[0][0] * g[1][0],
                (_, 1) => e[0] * g[0][1] * g[1][0] + e[1] * g[0][0] * g[1][1],
                (_, _) => {
                    e[0] * e[0] * g[0][2] * g[1][0]
                        + 2.0 * e[0] * e[1] * g[0][1] * g[1][1]
                        + e[1] * e[1] * g[0][0] * g[1][2]
                }
            };
            let mut out = [0.0; 2];
            for i in 0..d {
                out[i] = e[i] * val;
            }
            Ok(out)
        }
        KernelVariant::ConstantVector(c) => {
            let mut out = [0.0; 2];
            out[..c.len()].copy_from_slice(c);
            Ok(out)
        }
        KernelVariant::GridSampled(_) => invalid("grid-sampled kernels have no direct route"),
    }
}
