use crate::error::{invalid, Result};
use crate::scalar::{cst, Real};

/// Uniform periodic grid on the torus `[-L/2, L/2)^dim`.
///
/// Values are stored row-major with axis 0 varying fastest, so the flat index
/// of `(i0, i1)` is `i1 * n + i0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    dim: usize,
    points_per_dim: usize,
    extent: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(dim: usize, points_per_dim: usize, extent: T) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return invalid(format!("grid dimension must be 1 or 2, got {dim}"));
        }
        if points_per_dim < 16 || !points_per_dim.is_power_of_two() {
            return invalid(format!(
                "points per dimension must be a power of two >= 16, got {points_per_dim}"
            ));
        }
        if !(extent > T::zero()) || !extent.is_finite() {
            return invalid(format!("extent must be positive and finite, got {extent}"));
        }
        Ok(Self { dim, points_per_dim, extent })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn extent(&self) -> T {
        self.extent
    }

    pub fn spacing(&self) -> T {
        self.extent / cst(self.points_per_dim as f64)
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.points_per_dim.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of one grid point, `spacing^dim`.
    pub fn cell_volume(&self) -> T {
        self.spacing().powi(self.dim as i32)
    }

    /// Coordinate of index `i` along any axis.
    pub fn coord(&self, i: usize) -> T {
        -self.extent / cst(2.0) + cst::<T>(i as f64) * self.spacing()
    }

    /// Index of the grid point at the origin along each axis.
    pub fn origin_index(&self) -> usize {
        self.points_per_dim / 2
    }

    /// Splits a flat index into per-axis indices.
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        let n = self.points_per_dim;
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx % n, idx / n]
        }
    }

    pub fn flatten(&self, ij: [usize; 2]) -> usize {
        if self.dim == 1 {
            ij[0]
        } else {
            ij[1] * self.points_per_dim + ij[0]
        }
    }

    /// Position of a flat index (unused second coordinate is zero in 1D).
    pub fn position(&self, idx: usize) -> [T; 2] {
        let ij = self.unflatten(idx);
        if self.dim == 1 {
            [self.coord(ij[0]), T::zero()]
        } else {
            [self.coord(ij[0]), self.coord(ij[1])]
        }
    }

    /// Signed integer wavenumber of FFT slot `m` (Nyquist maps to `-n/2`).
    pub fn signed_mode(&self, m: usize) -> i64 {
        let n = self.points_per_dim as i64;
        let m = m as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    /// Angular frequency `2 pi k / L` of FFT slot `m`.
    pub fn wavenumber(&self, m: usize) -> T {
        cst::<T>(2.0 * std::f64::consts::PI * self.signed_mode(m) as f64) / self.extent
    }

    /// Wraps a coordinate onto `[-L/2, L/2)`.
    pub fn wrap(&self, x: T) -> T {
        let half = self.extent / cst(2.0);
        let shifted = (x + half) % self.extent;
        let shifted = if shifted < T::zero() { shifted + self.extent } else { shifted };
        shifted - half
    }

    /// Minimum-image difference `a - b` on the torus.
    pub fn periodic_delta(&self, a: T, b: T) -> T {
        self.wrap(a - b)
    }

    /// Whether a heat kernel of time `t` is resolved (std-dev at least two spacings).
    pub fn resolves_heat_time(&self, t: T) -> bool {
        t.sqrt() >= cst::<T>(2.0) * self.spacing()
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self == other
    }
}
