use std::io::{Read, Write};

use crate::error::{invalid, Error, Result};
use crate::scalar::{cst, to_f64, Real};
use crate::spectral::{GridSpec, ScalarField};

/// Densities of a flow of probability measures at the output times.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFlow<T> {
    pub times: Vec<f64>,
    pub densities: Vec<ScalarField<T>>,
    pub initial: ScalarField<T>,
}

const MAGIC: &[u8; 4] = b"MVFL";
const MASS_TOLERANCE: f64 = 1e-6;

impl<T: Real> MeasureFlow<T> {
    pub fn new(times: Vec<f64>, densities: Vec<ScalarField<T>>, initial: ScalarField<T>) -> Result<Self> {
        if times.len() != densities.len() {
            return invalid("one density per output time is required");
        }
        if densities.iter().any(|d| !d.grid().same_as(initial.grid())) {
            return invalid("all densities of a flow share one grid");
        }
        Ok(Self { times, densities, initial })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        self.initial.grid()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &ScalarField<T> {
        self.densities.last().unwrap_or(&self.initial)
    }

    /// Density at an output time (exact match within 1e-12).
    pub fn at(&self, t: f64) -> Option<&ScalarField<T>> {
        self.times.iter().position(|s| (s - t).abs() <= 1e-12 * t.abs().max(1.0)).map(|i| &self.densities[i])
    }

    /// Largest `|mass - 1|` over the output densities.
    pub fn max_mass_error(&self) -> f64 {
        self.densities.iter().map(|d| (to_f64(d.integral()) - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Checks the mass invariant of every output density.
    pub fn check_mass(&self) -> Result<()> {
        let err = self.max_mass_error();
        if err > MASS_TOLERANCE {
            return invalid(format!("flow mass deviates from 1 by {err}"));
        }
        Ok(())
    }

    /// `L¹` distances between consecutive densities (starting from the initial one).
    pub fn increments(&self) -> Vec<f64> {
        let mut prev = &self.initial;
        let vol = to_f64(self.grid().cell_volume());
        self.densities
            .iter()
            .map(|d| {
                let s: f64 = d.values().iter().zip(prev.values()).map(|(a, b)| to_f64((*a - *b).abs())).sum();
                prev = d;
                s * vol
            })
            .collect()
    }

    /// Binary dump, little endian: `"MVFL"`, `u32` version, `u32` dim, `u32` n, `f64` extent,
    /// `u32` time count, the times as `f64`, then the initial density and each density as
    /// `n^dim` `f64` values in row-major order (axis 0 fastest).
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let g = self.grid();
        w.write_all(MAGIC)?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&(g.dim() as u32).to_le_bytes())?;
        w.write_all(&(g.points_per_dim() as u32).to_le_bytes())?;
        w.write_all(&to_f64(g.extent()).to_le_bytes())?;
        w.write_all(&(self.times.len() as u32).to_le_bytes())?;
        for t in &self.times {
            w.write_all(&t.to_le_bytes())?;
        }
        for d in std::iter::once(&self.initial).chain(&self.densities) {
            for v in d.values() {
                w.write_all(&to_f64(*v).to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Io("not a flow file (bad magic)".into()));
        }
        let version = read_u32(&mut r)?;
        if version != 1 {
            return Err(Error::Io(format!("unsupported flow file version {version}")));
        }
        let dim = read_u32(&mut r)? as usize;
        let n = read_u32(&mut r)? as usize;
        let extent = read_f64(&mut r)?;
        let grid = GridSpec::new(dim, n, cst(extent))?;
        let count = read_u32(&mut r)? as usize;
        let times = (0..count).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
        let mut read_field = || -> Result<ScalarField<T>> {
            let vals = (0..grid.len()).map(|_| read_f64(&mut r).map(cst)).collect::<Result<Vec<T>>>()?;
            ScalarField::new(grid, vals)
        };
        let initial = read_field()?;
        let densities = (0..count).map(|_| read_field()).collect::<Result<Vec<_>>>()?;
        Self::new(times, densities, initial)
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
