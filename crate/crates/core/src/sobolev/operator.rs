use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::fit::{fit_exponent, PowerFit};
use super::index::{Exponent, SobolevIndex};
use super::lattice::BallLattice;
use super::norms::band_limit;
use crate::error::{invalid, Result};
use crate::scalar::{cst, to_f64, Real};
use crate::spectral::{bessel_symbol, heat_symbol, GridSpec, Mode, Spectrum};
use num_complex::Complex;

/// Predicted exponent of `t ↦ ‖∇^i P_t‖_{W̃^{-δ,k} → W̃^{-ε,p}}`.
pub fn heat_operator_exponent(d: usize, i: usize, from: SobolevIndex, to: SobolevIndex) -> f64 {
    -(i as f64 + from.delta - to.delta) / 2.0
        - d as f64 * (from.k.reciprocal() - to.k.reciprocal()) / 2.0
}

/// Estimated operator norm at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub t: f64,
    pub norm_estimate: f64,
    pub probes_used: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorProbe {
    pub fit: PowerFit,
    /// `exp(intercept)`: the empirical constant in front of the power law.
    pub constant: f64,
    pub theory_slope: f64,
    pub rows: Vec<ProbeRow>,
}

const MIN_DECADES: f64 = 1.5;

/// Estimates `‖∇^i P_t f‖_{W̃^{-ε,p}} / ‖f‖_{W̃^{-δ,k}}` maximized over test functions, for each `t`,
/// and fits the log-log slope.
///
/// Test functions are written as `f = (1-Δ)^{δ/2} G`, so `‖f‖_{W̃^{-δ,k}}` is the windowed
/// `L^k` norm of `G`. Candidates for `G`: the constant, Gaussian bumps and smoothed steps of
/// log-uniform width, band-limited noise of log-uniform band, and for each `t` the Hölder
/// dual of the operator's own kernel.
pub fn operator_exponent_probe<T: Real>(
    grid: &GridSpec<T>,
    i: usize,
    from: SobolevIndex,
    to: SobolevIndex,
    t_grid: &[f64],
    probes: usize,
    seed: u64,
) -> Result<OperatorProbe> {
    if i > 1 {
        return invalid(format!("derivative order must be 0 or 1, got {i}"));
    }
    if to.delta > from.delta + 1e-12 {
        return invalid(format!("target smoothness {} exceeds source {}", to.delta, from.delta));
    }
    if to.k.value() < from.k.value() {
        return invalid(format!("target exponent {} is below source {}", to.k, from.k));
    }
    validate_times(t_grid)?;
    if probes == 0 {
        return invalid("operator probe needs at least one test function");
    }
    let lat = BallLattice::new(grid)?;
    let lift = cst::<T>((from.delta - to.delta) / 2.0);
    let (kin, kout) = (from.k.value(), to.k.value());
    let symbol = move |m: &Mode<T>, t: T| -> Vec<Complex<T>> {
        let common = heat_symbol(m, t) * bessel_symbol(m, -lift);
        if i == 0 {
            vec![Complex::new(common, T::zero())]
        } else {
            (0..m.dim)
                .map(|axis| {
                    let mut order = [0usize; 2];
                    order[axis] = 1;
                    m.derivative_symbol(order) * common
                })
                .collect()
        }
    };
    let ts: Vec<T> = t_grid.iter().map(|&t| cst(t)).collect();

    let ratio = |g: &[T], spec: &Spectrum<T>, t: T| -> T {
        let norm_in = lat.sup_window_norm(g, kin);
        if !(norm_in > T::zero()) {
            return T::zero();
        }
        let comps = symbol(&spec.mode(0), t).len();
        let out: Vec<Vec<T>> = (0..comps)
            .map(|c| spec.synthesize(|m| symbol(m, t)[c]))
            .collect();
        let mag: Vec<T> = if comps == 1 {
            out.into_iter().next().unwrap()
        } else {
            (0..g.len())
                .map(|j| out.iter().map(|c| c[j] * c[j]).sum::<T>().sqrt())
                .collect()
        };
        lat.sup_window_norm(&mag, kout) / norm_in
    };

    let random_best: Vec<T> = (0..probes)
        .into_par_iter()
        .map(|p| {
            let g = random_probe(grid, p, seed);
            let spec = Spectrum::forward(grid, &g);
            ts.iter().map(|&t| ratio(&g, &spec, t)).collect::<Vec<T>>()
        })
        .reduce(
            || vec![T::zero(); ts.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect(),
        );

    let kernel_best: Vec<T> = ts
        .par_iter()
        .map(|&t| {
            let g = kernel_dual(grid, from.k, t, &symbol);
            let spec = Spectrum::forward(grid, &g);
            ratio(&g, &spec, t)
        })
        .collect();

    let rows: Vec<ProbeRow> = t_grid
        .iter()
        .zip(random_best.iter().zip(&kernel_best))
        .map(|(&t, (a, b))| ProbeRow {
            t,
            norm_estimate: to_f64(a.max(*b)),
            probes_used: probes + 1,
            seed,
        })
        .collect();
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.norm_estimate)).collect();
    let fit = fit_exponent(&pairs)?;
    Ok(OperatorProbe {
        constant: fit.intercept.exp(),
        fit,
        theory_slope: heat_operator_exponent(grid.dim(), i, from, to),
        rows,
    })
}

fn validate_times(t_grid: &[f64]) -> Result<()> {
    if t_grid.len() < 4 {
        return invalid(format!("time grid needs at least 4 points, got {}", t_grid.len()));
    }
    if t_grid.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return invalid("time grid must be positive and finite");
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("time grid must be strictly increasing");
    }
    let decades = (t_grid[t_grid.len() - 1] / t_grid[0]).log10();
    if decades < MIN_DECADES {
        return invalid(format!("time grid spans {decades:.2} decades, need {MIN_DECADES}"));
    }
    Ok(())
}

/// Probe `p` of the random families; probe 0 is the constant.
fn random_probe<T: Real>(grid: &GridSpec<T>, p: usize, seed: u64) -> Vec<T> {
    if p == 0 {
        return vec![T::one(); grid.len()];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(p as u64);
    let h = to_f64(grid.spacing());
    let (wmin, wmax) = (2.0 * h, 2.0);
    let width = (wmin.ln() + rng.random::<f64>() * (wmax / wmin).ln()).exp();
    match p % 3 {
        0 => (0..grid.len())
            .map(|j| {
                let x = grid.position(j);
                let r2 = to_f64(x[0] * x[0] + x[1] * x[1]);
                cst((-r2 / (2.0 * width * width)).exp())
            })
            .collect(),
        1 => (0..grid.len())
            .map(|j| cst((to_f64(grid.position(j)[0]) / width).tanh()))
            .collect(),
        _ => {
            let nyquist = std::f64::consts::PI / h;
            let band = (1.0f64.ln() + rng.random::<f64>() * nyquist.ln()).exp();
            let noise: Vec<T> =
                (0..grid.len()).map(|_| cst::<T>(StandardNormal.sample(&mut rng))).collect();
            band_limit(grid, &noise, band)
        }
    }
}

/// Hölder dual (in `L^k`) of the kernel of the first output component, reflected.
fn kernel_dual<T, F>(grid: &GridSpec<T>, k: Exponent, t: T, symbol: &F) -> Vec<T>
where
    T: Real,
    F: Fn(&Mode<T>, T) -> Vec<Complex<T>>,
{
    let mut delta = vec![T::zero(); grid.len()];
    let origin = grid.flatten([grid.origin_index(); 2]);
    delta[origin] = T::one() / grid.cell_volume();
    let kernel = Spectrum::forward(grid, &delta).synthesize(|m| symbol(m, t)[0]);
    // Reflect through the origin so that (T G)(0) = ∫ K(-y) G(y) dy pairs K with itself.
    let n = grid.points_per_dim();
    let reflect = |j: usize| -> usize {
        let ij = grid.unflatten(j);
        let mut r = [0usize; 2];
        for a in 0..grid.dim() {
            r[a] = (2 * grid.origin_index() + n - ij[a]) % n;
        }
        grid.flatten(r)
    };
    let reflected: Vec<T> = (0..grid.len()).map(|j| kernel[reflect(j)]).collect();
    match k.conjugate() {
        Exponent::Infinity => {
            let (imax, _) = reflected
                .iter()
                .enumerate()
                .fold((0, T::zero()), |b, (j, v)| if v.abs() > b.1 { (j, v.abs()) } else { b });
            let mut g = vec![T::zero(); grid.len()];
            g[imax] = reflected[imax].signum() / grid.cell_volume();
            g
        }
        Exponent::Finite(q) => reflected
            .iter()
            .map(|&v| v.signum() * v.abs().powf(cst(q - 1.0)))
            .collect(),
    }
}
