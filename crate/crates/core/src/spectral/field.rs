use super::grid::GridSpec;
use crate::error::{invalid, Error, Result};
use crate::scalar::{cst, Real};

/// Real samples on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    grid: GridSpec<T>,
    values: Vec<T>,
    /// Set when a heat kernel narrower than two grid spacings was applied.
    pub under_resolved: bool,
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: GridSpec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite field value at index {i}"));
        }
        Ok(Self { grid, values, under_resolved: false })
    }

    /// Builds a field without the finiteness scan; used on outputs of finite operations.
    pub(crate) fn from_parts(grid: GridSpec<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, under_resolved: false }
    }

    pub fn zeros(grid: GridSpec<T>) -> Self {
        Self::from_parts(grid, vec![T::zero(); grid.len()])
    }

    pub fn constant(grid: GridSpec<T>, c: T) -> Self {
        Self::from_parts(grid, vec![c; grid.len()])
    }

    /// Samples `f` at every grid point. `f` receives `[x, y]` (y = 0 in 1D).
    pub fn from_fn<F: Fn([T; 2]) -> T>(grid: GridSpec<T>, f: F) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self::new(grid, values)
    }

    /// Periodized isotropic Gaussian density `N(mean, variance I)`.
    pub fn gaussian(grid: GridSpec<T>, mean: [T; 2], variance: T) -> Result<Self> {
        if !(variance > T::zero()) {
            return invalid(format!("gaussian variance must be positive, got {variance}"));
        }
        let l = grid.extent();
        let sd = variance.sqrt();
        let images = (cst::<f64>(10.0) * crate::scalar::to_f64(sd) / crate::scalar::to_f64(l))
            .ceil() as i64
            + 1;
        let d = grid.dim();
        let norm = (cst::<T>(2.0) * T::PI() * variance).powf(cst::<T>(-(d as f64) / 2.0));
        let profile = |x: T, m: T| -> T {
            let mut acc = T::zero();
            for k in -images..=images {
                let z = grid.wrap(x - m) + cst::<T>(k as f64) * l;
                acc += (-(z * z) / (cst::<T>(2.0) * variance)).exp();
            }
            acc
        };
        Self::from_fn(grid, |p| {
            let mut v = norm * profile(p[0], mean[0]);
            if d == 2 {
                v *= profile(p[1], mean[1]);
            }
            v
        })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid-quadrature integral.
    pub fn integral(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.grid.cell_volume()
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn l1_norm(&self) -> T {
        self.values.iter().map(|v| v.abs()).sum::<T>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> T {
        (self.values.iter().map(|v| *v * *v).sum::<T>() * self.grid.cell_volume()).sqrt()
    }

    /// Checks the density invariant: nonnegative and unit mass within `1e-8`.
    pub fn check_density(&self) -> Result<()> {
        if let Some(i) = self.values.iter().position(|v| *v < T::zero()) {
            return invalid(format!("density is negative at index {i}"));
        }
        let mass = crate::scalar::to_f64(self.integral());
        if (mass - 1.0).abs() > 1e-8 {
            return invalid(format!("density mass {mass} differs from 1"));
        }
        Ok(())
    }

    pub fn map<F: Fn(T) -> T>(&self, f: F) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            under_resolved: self.under_resolved,
        }
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    fn zip_with<F: Fn(T, T) -> T>(&self, other: &Self, f: F) -> Result<Self> {
        ensure_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            under_resolved: self.under_resolved || other.under_resolved,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.zip_with(other, |x, y| a * x + b * y)
    }

    /// Shifts by whole grid cells along each axis (periodic).
    pub fn roll(&self, shift: [i64; 2]) -> Self {
        let n = self.grid.points_per_dim() as i64;
        let mut out = vec![T::zero(); self.values.len()];
        for (idx, v) in self.values.iter().enumerate() {
            let ij = self.grid.unflatten(idx);
            let mut dst = [0usize; 2];
            for axis in 0..self.grid.dim() {
                dst[axis] = (ij[axis] as i64 + shift[axis]).rem_euclid(n) as usize;
            }
            out[self.grid.flatten(dst)] = *v;
        }
        Self::from_parts(self.grid, out)
    }

    /// Divides by the integral so the field has unit mass.
    pub fn normalized(&self) -> Result<Self> {
        let mass = self.integral();
        if !(mass.abs() > T::zero()) {
            return invalid("cannot normalize a field with zero integral");
        }
        Ok(self.scale(T::one() / mass))
    }
}

pub(crate) fn ensure_same_grid<T: Real>(a: &GridSpec<T>, b: &GridSpec<T>) -> Result<()> {
    if a != b {
        return Err(Error::InvalidArgument(format!("grid mismatch: {a:?} vs {b:?}")));
    }
    Ok(())
}

/// One real array per spatial dimension on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    grid: GridSpec<T>,
    components: Vec<Vec<T>>,
    pub under_resolved: bool,
}

impl<T: Real> VectorField<T> {
    pub fn new(grid: GridSpec<T>, components: Vec<Vec<T>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return invalid(format!(
                "vector field needs {} components, got {}",
                grid.dim(),
                components.len()
            ));
        }
        for (c, comp) in components.iter().enumerate() {
            if comp.len() != grid.len() {
                return invalid(format!("component {c} has wrong length {}", comp.len()));
            }
            if comp.iter().any(|v| !v.is_finite()) {
                return invalid(format!("component {c} has non-finite values"));
            }
        }
        Ok(Self { grid, components, under_resolved: false })
    }

    pub(crate) fn from_parts(grid: GridSpec<T>, components: Vec<Vec<T>>) -> Self {
        debug_assert_eq!(components.len(), grid.dim());
        Self { grid, components, under_resolved: false }
    }

    pub fn zeros(grid: GridSpec<T>) -> Self {
        Self::from_parts(grid, vec![vec![T::zero(); grid.len()]; grid.dim()])
    }

    pub fn constant(grid: GridSpec<T>, c: &[T]) -> Result<Self> {
        if c.len() != grid.dim() {
            return invalid(format!("constant vector has {} entries, need {}", c.len(), grid.dim()));
        }
        Ok(Self::from_parts(grid, c.iter().map(|&ci| vec![ci; grid.len()]).collect()))
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<T>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &[T] {
        &self.components[i]
    }

    pub fn components_mut(&mut self) -> &mut [Vec<T>] {
        &mut self.components
    }

    pub fn component_field(&self, i: usize) -> ScalarField<T> {
        let mut f = ScalarField::from_parts(self.grid, self.components[i].clone());
        f.under_resolved = self.under_resolved;
        f
    }

    /// Pointwise Euclidean length.
    pub fn magnitude(&self) -> ScalarField<T> {
        let values = (0..self.grid.len())
            .map(|i| self.components.iter().map(|c| c[i] * c[i]).sum::<T>().sqrt())
            .collect();
        let mut f = ScalarField::from_parts(self.grid, values);
        f.under_resolved = self.under_resolved;
        f
    }

    pub fn sup_norm(&self) -> T {
        self.magnitude().sup_norm()
    }

    pub fn scale(&self, c: T) -> Self {
        Self {
            grid: self.grid,
            components: self
                .components
                .iter()
                .map(|comp| comp.iter().map(|&v| v * c).collect())
                .collect(),
            under_resolved: self.under_resolved,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        ensure_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| x - y).collect())
                .collect(),
            under_resolved: self.under_resolved || other.under_resolved,
        })
    }

    /// Sup of the pointwise distance to `other`.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        Ok(self.sub(other)?.sup_norm())
    }
}
