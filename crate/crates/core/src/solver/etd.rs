//! Fourth-order exponential time differencing (Cox–Matthews) for
//! `∂_t ρ = ½Δρ - ∇·(b ρ)` with a prescribed drift `b(s, x)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cst, to_f64, Real};
use crate::spectral::{mode_of, GridSpec, Spectrum, VectorField};

/// `φ_1, φ_2, φ_3` at `z ≤ 0`.
fn phi123(z: f64) -> (f64, f64, f64) {
    if z.abs() < 1.0 {
        // φ_k(z) = Σ_j z^j / (j + k)!
        let (mut p1, mut p2, mut p3) = (0.0, 0.0, 0.0);
        let mut zj = 1.0;
        let mut fact = 1.0; // j!
        for j in 0..24 {
            let j = j as f64;
            let f1 = fact * (j + 1.0);
            let f2 = f1 * (j + 2.0);
            let f3 = f2 * (j + 3.0);
            p1 += zj / f1;
            p2 += zj / f2;
            p3 += zj / f3;
            zj *= z;
            fact *= j + 1.0;
        }
        (p1, p2, p3)
    } else {
        let e = z.exp();
        let p1 = (e - 1.0) / z;
        let p2 = (e - 1.0 - z) / (z * z);
        let p3 = (e - 1.0 - z - 0.5 * z * z) / (z * z * z);
        (p1, p2, p3)
    }
}

/// Per-mode coefficients of one step of size `h`.
struct StepCoeffs<T> {
    e: Vec<T>,
    e2: Vec<T>,
    q: Vec<T>,
    f1: Vec<T>,
    f2: Vec<T>,
    f3: Vec<T>,
}

impl<T: Real> StepCoeffs<T> {
    fn new(lin: &[f64], h: f64) -> Self {
        let n = lin.len();
        let mut c = Self {
            e: Vec::with_capacity(n),
            e2: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            f1: Vec::with_capacity(n),
            f2: Vec::with_capacity(n),
            f3: Vec::with_capacity(n),
        };
        for &l in lin {
            let z = h * l;
            let (p1, p2, p3) = phi123(z);
            let (q1, _, _) = phi123(z / 2.0);
            c.e.push(cst(z.exp()));
            c.e2.push(cst((z / 2.0).exp()));
            c.q.push(cst(0.5 * h * q1));
            c.f1.push(cst(h * (p1 - 3.0 * p2 + 4.0 * p3)));
            c.f2.push(cst(h * (p2 - 2.0 * p3)));
            c.f3.push(cst(h * (-p2 + 4.0 * p3)));
        }
        c
    }
}

/// Drift seen by the stepper: `None` where it vanishes.
pub(crate) trait DriftPath<T: Real>: Sync {
    fn at(&self, s: f64) -> Option<Vec<Vec<T>>>;
}

/// Linear interpolation of precomputed base fields times a scalar envelope.
pub(crate) struct FrozenDrift<'a, T> {
    pub nodes: &'a [f64],
    pub fields: &'a [VectorField<T>],
    pub envelope: &'a (dyn Fn(f64) -> f64 + Sync),
}

impl<T: Real> DriftPath<T> for FrozenDrift<'_, T> {
    fn at(&self, s: f64) -> Option<Vec<Vec<T>>> {
        let env = (self.envelope)(s);
        if env == 0.0 || self.fields.is_empty() {
            return None;
        }
        let last = self.nodes.len() - 1;
        let (i, w) = if s <= self.nodes[0] {
            (0, 0.0)
        } else if s >= self.nodes[last] {
            (last.saturating_sub(1), if last == 0 { 0.0 } else { 1.0 })
        } else {
            let i = self.nodes.partition_point(|&t| t <= s) - 1;
            (i, (s - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i]))
        };
        let a: T = cst(env * (1.0 - w));
        let b: T = cst(env * w);
        let f0 = &self.fields[i];
        let f1 = &self.fields[(i + 1).min(last)];
        Some(
            f0.components()
                .iter()
                .zip(f1.components())
                .map(|(c0, c1)| c0.iter().zip(c1).map(|(&x, &y)| a * x + b * y).collect())
                .collect(),
        )
    }
}

/// Options of the time discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub max_step: f64,
    /// Substeps of the interval starting at `origin` are `a + (b - a)(j/m)^g`; `g = 1` is uniform.
    pub first_grading: f64,
    pub min_first_substeps: usize,
    /// Start of the graded interval: the time the drift switches on.
    pub origin: f64,
}

/// Substep boundaries of `[a, b]`.
pub(crate) fn substeps(a: f64, b: f64, ctl: &StepControl) -> Vec<f64> {
    let len = b - a;
    let mut m = (len / ctl.max_step).ceil().max(1.0) as usize;
    if a == ctl.origin && ctl.first_grading > 1.0 {
        m = m.max(ctl.min_first_substeps);
        return (0..=m)
            .map(|j| if j == m { b } else { a + len * (j as f64 / m as f64).powf(ctl.first_grading) })
            .collect();
    }
    (0..=m).map(|j| if j == m { b } else { a + len * j as f64 / m as f64 }).collect()
}

/// Bookkeeping of the positivity and mass repairs done at output times.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RepairStats {
    /// Total mass removed by clipping, summed over output times.
    pub clipped_mass: f64,
    /// Largest `|mass - 1|` before renormalization.
    pub max_mass_drift: f64,
    /// Largest negative mass seen before clipping.
    pub max_negative_mass: f64,
    pub steps: usize,
}

/// Repair thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepairControl {
    pub clip_floor: f64,
    pub negative_mass_limit: f64,
}

/// Linear part and derivative symbols on one grid.
pub(crate) struct Propagator<T> {
    grid: GridSpec<T>,
    lin: Vec<f64>,
    deriv: Vec<Vec<Complex<T>>>,
}

impl<T: Real> Propagator<T> {
    pub fn new(grid: &GridSpec<T>) -> Self {
        let modes: Vec<_> = (0..grid.len()).map(|i| mode_of(grid, i)).collect();
        let lin = modes.iter().map(|m| -0.5 * to_f64(m.norm_sq())).collect();
        let deriv = (0..grid.dim())
            .map(|axis| {
                let mut order = [0usize; 2];
                order[axis] = 1;
                modes.iter().map(|m| m.derivative_symbol(order)).collect()
            })
            .collect();
        Self { grid: *grid, lin, deriv }
    }

    /// `-∇·(b v)` in Fourier space, or `None` when `b = 0`.
    fn nonlinear(&self, v_hat: &[Complex<T>], b: &Option<Vec<Vec<T>>>) -> Option<Vec<Complex<T>>> {
        let b = b.as_ref()?;
        let v = Spectrum::from_coeffs(&self.grid, v_hat.to_vec()).to_real();
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = vec![zero; v.len()];
        for (comp, d) in b.iter().zip(&self.deriv) {
            let w: Vec<T> = comp.iter().zip(&v).map(|(&bi, &vi)| bi * vi).collect();
            let w_hat = Spectrum::forward(&self.grid, &w);
            for ((o, wc), dc) in out.iter_mut().zip(w_hat.coeffs()).zip(d) {
                *o -= *dc * *wc;
            }
        }
        Some(out)
    }

    /// Evolves `initial` through `times` (starting at time 0). Returns the density at each time.
    pub fn evolve(
        &self,
        initial: &[T],
        times: &[f64],
        drift: &dyn DriftPath<T>,
        ctl: &StepControl,
        repair: &RepairControl,
    ) -> Result<(Vec<Vec<T>>, RepairStats)> {
        let mut u = Spectrum::forward(&self.grid, initial).coeffs().to_vec();
        let mut out = Vec::with_capacity(times.len());
        let mut stats = RepairStats::default();
        let mut t = 0.0;
        let mut cache: Option<(u64, StepCoeffs<T>)> = None;
        for &target in times {
            let points = substeps(t, target, ctl);
            for w in points.windows(2) {
                let (s, h) = (w[0], w[1] - w[0]);
                if !(h > 0.0) {
                    continue;
                }
                if cache.as_ref().map(|c| c.0) != Some(h.to_bits()) {
                    cache = Some((h.to_bits(), StepCoeffs::new(&self.lin, h)));
                }
                let c = &cache.as_ref().expect("just set").1;
                self.step(&mut u, s, h, c, drift);
                stats.steps += 1;
            }
            t = target;
            let mut values = Spectrum::from_coeffs(&self.grid, u.clone()).to_real();
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { step: stats.steps, time: t });
            }
            if self.repair(&mut values, t, repair, &mut stats)? {
                u = Spectrum::forward(&self.grid, &values).coeffs().to_vec();
            }
            out.push(values);
        }
        Ok((out, stats))
    }

    fn step(&self, u: &mut [Complex<T>], s: f64, h: f64, c: &StepCoeffs<T>, drift: &dyn DriftPath<T>) {
        let b0 = drift.at(s);
        let bh = drift.at(s + h / 2.0);
        let b1 = drift.at(s + h);
        let nu = self.nonlinear(u, &b0);
        if nu.is_none() && bh.is_none() && b1.is_none() {
            for (x, e) in u.iter_mut().zip(&c.e) {
                *x = *x * *e;
            }
            return;
        }
        let zero = Complex::new(T::zero(), T::zero());
        let get = |v: &Option<Vec<Complex<T>>>, i: usize| v.as_ref().map_or(zero, |v| v[i]);
        let a: Vec<Complex<T>> = (0..u.len()).map(|i| u[i] * c.e2[i] + get(&nu, i) * c.q[i]).collect();
        let na = self.nonlinear(&a, &bh);
        let b: Vec<Complex<T>> = (0..u.len()).map(|i| u[i] * c.e2[i] + get(&na, i) * c.q[i]).collect();
        let nb = self.nonlinear(&b, &bh);
        let two: T = cst(2.0);
        let cc: Vec<Complex<T>> = (0..u.len())
            .map(|i| a[i] * c.e2[i] + (get(&nb, i) * two - get(&nu, i)) * c.q[i])
            .collect();
        let nc = self.nonlinear(&cc, &b1);
        for i in 0..u.len() {
            u[i] = u[i] * c.e[i]
                + get(&nu, i) * c.f1[i]
                + (get(&na, i) + get(&nb, i)) * (c.f2[i] * two)
                + get(&nc, i) * c.f3[i];
        }
    }

    /// Clips values below `-clip_floor` and renormalizes the mass. Returns whether values changed.
    fn repair(&self, values: &mut [T], t: f64, ctl: &RepairControl, stats: &mut RepairStats) -> Result<bool> {
        let vol = to_f64(self.grid.cell_volume());
        let negative: f64 = values.iter().map(|v| (-to_f64(*v)).max(0.0)).sum::<f64>() * vol;
        stats.max_negative_mass = stats.max_negative_mass.max(negative);
        if negative > ctl.negative_mass_limit {
            return Err(Error::DegradedAccuracy { time: t, negative_mass: negative });
        }
        let floor: T = cst(-ctl.clip_floor);
        let mut changed = false;
        let mut clipped = 0.0;
        for v in values.iter_mut() {
            if *v < floor {
                clipped += to_f64(floor - *v);
                *v = floor;
                changed = true;
            }
        }
        stats.clipped_mass += clipped * vol;
        let mass: f64 = values.iter().map(|v| to_f64(*v)).sum::<f64>() * vol;
        let drift = (mass - 1.0).abs();
        stats.max_mass_drift = stats.max_mass_drift.max(drift);
        if drift > 0.0 && mass > 0.0 {
            let s: T = cst(1.0 / mass);
            for v in values.iter_mut() {
                *v = *v * s;
            }
            changed = true;
        }
        Ok(changed)
    }
}

#[cfg(test)]
mod tests {
    use super::phi123;

    #[test]
    fn phi_branches_agree_at_the_switch() {
        let a = phi123(-1.0 + 1e-9);
        let b = phi123(-1.0 - 1e-9);
        assert!((a.0 - b.0).abs() < 1e-8 && (a.1 - b.1).abs() < 1e-8 && (a.2 - b.2).abs() < 1e-8);
        let z = phi123(0.0);
        assert!((z.0 - 1.0).abs() < 1e-15 && (z.1 - 0.5).abs() < 1e-15 && (z.2 - 1.0 / 6.0).abs() < 1e-15);
    }
}
