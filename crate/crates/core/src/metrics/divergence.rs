use crate::error::Result;
use crate::scalar::{to_f64, Real};
use crate::spectral::{ensure_same_grid, ScalarField};

/// Mass of `ρ_1` on the set `{ρ_2 ≤ 0}` above which `Ent(ρ_1|ρ_2) = +∞`.
pub const ENTROPY_NULL_MASS: f64 = 1e-12;

/// `∫ ρ_1 log(ρ_1/ρ_2)` with `0 log 0 = 0`; `+∞` when `ρ_1` charges `{ρ_2 ≤ 0}`.
pub fn relative_entropy<T: Real>(rho1: &ScalarField<T>, rho2: &ScalarField<T>) -> Result<f64> {
    ensure_same_grid(rho1.grid(), rho2.grid())?;
    let vol = to_f64(rho1.grid().cell_volume());
    let mut ent = 0.0;
    let mut null_mass = 0.0;
    for (a, b) in rho1.values().iter().zip(rho2.values()) {
        let (a, b) = (to_f64(*a), to_f64(*b));
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            null_mass += a * vol;
            continue;
        }
        ent += a * (a / b).ln();
    }
    if null_mass > ENTROPY_NULL_MASS {
        return Ok(f64::INFINITY);
    }
    Ok((ent * vol).max(0.0))
}

/// `∫ |ρ_1 - ρ_2|`, the total mass of the difference (between 0 and 2).
pub fn total_variation<T: Real>(rho1: &ScalarField<T>, rho2: &ScalarField<T>) -> Result<f64> {
    ensure_same_grid(rho1.grid(), rho2.grid())?;
    let vol = to_f64(rho1.grid().cell_volume());
    Ok(rho1.values().iter().zip(rho2.values()).map(|(a, b)| to_f64((*a - *b).abs())).sum::<f64>() * vol)
}
