use super::sim::ParticleEnsemble;
use crate::error::{invalid, Error, Result};
use crate::scalar::{cst, to_f64, Real};
use crate::spectral::{heat_apply, real_symbol, GridSpec, ScalarField, Spectrum};

/// Lower grid index and weight of the upper neighbour along one axis.
fn cell(x: f64, extent: f64, h: f64, n: usize) -> (usize, f64) {
    let u = (x + extent / 2.0) / h;
    let j = u.floor();
    let f = u - j;
    ((j as i64).rem_euclid(n as i64) as usize, f)
}

/// Cloud-in-cell density of the empirical measure (mass exactly 1 up to rounding).
pub fn deposit_cic<T: Real>(ens: &ParticleEnsemble, grid: &GridSpec<T>) -> Result<ScalarField<T>> {
    if ens.dim != grid.dim() {
        return Err(Error::WrongDimension { expected: grid.dim(), got: ens.dim });
    }
    let n = grid.points_per_dim();
    let h = to_f64(grid.spacing());
    let extent = to_f64(grid.extent());
    let w = 1.0 / (ens.len() as f64 * to_f64(grid.cell_volume()));
    let mut acc = vec![0.0f64; grid.len()];
    for i in 0..ens.len() {
        let p = ens.particle(i);
        if ens.dim == 1 {
            let (j, f) = cell(p[0], extent, h, n);
            acc[j] += w * (1.0 - f);
            acc[(j + 1) % n] += w * f;
        } else {
            let (j0, f0) = cell(p[0], extent, h, n);
            let (j1, f1) = cell(p[1], extent, h, n);
            for (a, wa) in [(j0, 1.0 - f0), ((j0 + 1) % n, f0)] {
                for (b, wb) in [(j1, 1.0 - f1), ((j1 + 1) % n, f1)] {
                    acc[grid.flatten([a, b])] += w * wa * wb;
                }
            }
        }
    }
    ScalarField::new(*grid, acc.into_iter().map(cst).collect())
}

/// Cloud-in-cell interpolation of a grid field at every particle.
pub fn interpolate_cic<T: Real>(f: &ScalarField<T>, ens: &ParticleEnsemble) -> Vec<f64> {
    let grid = f.grid();
    let n = grid.points_per_dim();
    let h = to_f64(grid.spacing());
    let extent = to_f64(grid.extent());
    let v = f.values();
    (0..ens.len())
        .map(|i| {
            let p = ens.particle(i);
            if ens.dim == 1 {
                let (j, t) = cell(p[0], extent, h, n);
                (1.0 - t) * to_f64(v[j]) + t * to_f64(v[(j + 1) % n])
            } else {
                let (j0, f0) = cell(p[0], extent, h, n);
                let (j1, f1) = cell(p[1], extent, h, n);
                let mut s = 0.0;
                for (a, wa) in [(j0, 1.0 - f0), ((j0 + 1) % n, f0)] {
                    for (b, wb) in [(j1, 1.0 - f1), ((j1 + 1) % n, f1)] {
                        s += wa * wb * to_f64(v[grid.flatten([a, b])]);
                    }
                }
                s
            }
        })
        .collect()
}

/// Divides by the CIC transfer function `Π sinc²(ξ_a h/2)`.
pub fn sharpen<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    let grid = *f.grid();
    let h = to_f64(grid.spacing());
    let values = Spectrum::forward(&grid, f.values()).synthesize(|m| {
        let mut w = 1.0;
        for &xi in m.xi.iter().take(grid.dim()) {
            let a = to_f64(xi) * h / 2.0;
            if a != 0.0 {
                w *= (a.sin() / a).powi(2);
            }
        }
        real_symbol(cst(1.0 / w))
    });
    let mut out = ScalarField::new(grid, values).expect("finite transfer function");
    out.under_resolved = f.under_resolved;
    out
}

/// Gaussian kernel density estimate: CIC histogram smoothed by heat flow to time `bandwidth²`.
pub fn empirical_density<T: Real>(ens: &ParticleEnsemble, grid: &GridSpec<T>, bandwidth: f64) -> Result<ScalarField<T>> {
    if !(bandwidth >= to_f64(grid.spacing())) {
        return invalid(format!("bandwidth {bandwidth} is below the grid spacing {}", grid.spacing()));
    }
    let hist = deposit_cic(ens, grid)?;
    heat_apply(&hist, cst(bandwidth * bandwidth))
}
