use num_complex::Complex;

use super::spec::KernelVariant;
use crate::scalar::{cst, to_f64, Real};
use crate::spectral::Mode;

/// Coefficient `C` in `ĥ(ξ) = C diag(c) iξ |ξ|^{β-2}` for `h(z) = diag(c) z |z|^{-(d+β)}`,
/// with the convention `ĥ(ξ) = ∫ h(z) e^{-iξ·z} dz`. `None` at the poles `β = 2, 4, …`.
pub fn riesz_constant(d: usize, beta: f64) -> Option<f64> {
    if is_even_pole(beta) {
        return None;
    }
    let df = d as f64;
    Some(
        -(2f64).powf(1.0 - beta) * std::f64::consts::PI.powf(df / 2.0) * libm::tgamma(1.0 - beta / 2.0)
            / libm::tgamma((df + beta) / 2.0),
    )
}

/// For `β = 2m`: `ĥ(ξ) = A diag(c) iξ |ξ|^{2m-2} ln|ξ|` up to a polynomial in `ξ`
/// (a combination of derivatives of `δ_0`, invisible away from the origin).
pub fn riesz_log_constant(d: usize, m: u32) -> f64 {
    let df = d as f64;
    let mf = m as f64;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    -(2f64).powf(1.0 - 2.0 * mf) * std::f64::consts::PI.powf(df / 2.0) * sign * 2.0
        / (libm::tgamma(mf) * libm::tgamma((df + 2.0 * mf) / 2.0))
}

fn is_even_pole(beta: f64) -> bool {
    beta >= 2.0 && (beta / 2.0 - (beta / 2.0).round()).abs() < 1e-12
}

/// Fourier symbol of the unmollified kernel, one entry per component.
///
/// Grid-sampled kernels have no closed-form symbol and return `None`.
pub fn kernel_symbol<T: Real>(
    variant: &KernelVariant<T>,
    mode: &Mode<T>,
    extent: f64,
) -> Option<[Complex<T>; 2]> {
    let zero = Complex::new(T::zero(), T::zero());
    let d = mode.dim;
    let xi = [to_f64(mode.xi[0]), to_f64(mode.xi[1])];
    let mut out = [zero; 2];
    match variant {
        KernelVariant::RieszOrder { c, n0, eps0 } => {
            if mode.is_zero() {
                return Some(out);
            }
            let beta = 2.0 * *n0 as f64 + eps0;
            let r = to_f64(mode.norm());
            let radial = match riesz_constant(d, beta) {
                Some(cc) => cc * r.powf(beta - 2.0),
                None => {
                    let m = (beta / 2.0).round() as u32;
                    riesz_log_constant(d, m) * r.powf(beta - 2.0) * r.ln()
                }
            };
            for i in 0..d {
                if mode.nyquist[i] {
                    continue;
                }
                out[i] = Complex::new(T::zero(), cst(c[i] * radial * xi[i]));
            }
        }
        KernelVariant::DiracDerivative { order, direction } => {
            let norm: f64 = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
            let e: Vec<f64> = direction.iter().map(|v| v / norm).collect();
            let along: f64 = (0..d).map(|i| e[i] * xi[i]).sum();
            if order % 2 == 1 && (0..d).any(|i| mode.nyquist[i] && e[i] != 0.0) {
                return Some(out);
            }
            let ik = Complex::new(0.0, along);
            let mut p = Complex::new(1.0, 0.0);
            for _ in 0..*order {
                p *= ik;
            }
            for i in 0..d {
                out[i] = Complex::new(cst(e[i] * p.re), cst(e[i] * p.im));
            }
        }
        KernelVariant::ConstantVector(c) => {
            if mode.is_zero() {
                let vol = extent.powi(d as i32);
                for i in 0..d {
                    out[i] = Complex::new(cst(c[i] * vol), T::zero());
                }
            }
        }
        KernelVariant::GridSampled(_) => return None,
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_one_dimensional_transforms() {
        // sign(z) ↦ -2i/ξ, 1/z ↦ -iπ sign ξ.
        assert!((riesz_constant(1, 0.0).unwrap() + 2.0).abs() < 1e-14);
        assert!((riesz_constant(1, 1.0).unwrap() + std::f64::consts::PI).abs() < 1e-14);
        // z/|z|^3 in 2D ↦ -2π i ξ/|ξ|.
        assert!((riesz_constant(2, 1.0).unwrap() + 2.0 * std::f64::consts::PI).abs() < 1e-13);
        assert!(riesz_constant(1, 2.0).is_none());
        // sign(z)/z² ↦ 2 i ξ ln|ξ| + polynomial.
        assert!((riesz_log_constant(1, 1) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn log_constant_is_residue_of_power_constant() {
        for d in [1usize, 2] {
            for m in [1u32, 2] {
                let b = 2.0 * m as f64;
                let h = 1e-6;
                let residue = h * riesz_constant(d, b + h).unwrap();
                let a = riesz_log_constant(d, m);
                assert!(((residue - a) / a).abs() < 1e-4, "d={d} m={m}: {residue} vs {a}");
            }
        }
    }
}
