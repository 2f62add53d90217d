use num_complex::Complex;

use super::grid::GridSpec;
use crate::scalar::{cst, Real};

/// One Fourier mode of the grid as seen by a symbol.
#[derive(Debug, Clone, Copy)]
pub struct Mode<T> {
    pub xi: [T; 2],
    /// Whether the mode sits on the Nyquist frequency along each axis.
    pub nyquist: [bool; 2],
    pub dim: usize,
}

impl<T: Real> Mode<T> {
    pub fn norm_sq(&self) -> T {
        self.xi[0] * self.xi[0] + self.xi[1] * self.xi[1]
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.xi[0] == T::zero() && self.xi[1] == T::zero()
    }

    /// Symbol `(i xi)^alpha`; odd powers vanish on a Nyquist axis.
    pub fn derivative_symbol(&self, order: [usize; 2]) -> Complex<T> {
        let mut out = Complex::new(T::one(), T::zero());
        for axis in 0..2 {
            let p = order[axis];
            if p == 0 {
                continue;
            }
            if self.nyquist[axis] && p % 2 == 1 {
                return Complex::new(T::zero(), T::zero());
            }
            let ik = Complex::new(T::zero(), self.xi[axis]);
            for _ in 0..p {
                out = out * ik;
            }
        }
        out
    }
}

fn transform_axis<T: Real>(data: &mut [Complex<T>], n: usize, dim: usize, axis: usize, inverse: bool) {
    let (fwd, inv) = T::fft_pair(n);
    let plan = if inverse { inv } else { fwd };
    if dim == 1 || axis == 0 {
        for row in data.chunks_mut(n) {
            plan.process(row);
        }
    } else {
        let mut column = vec![Complex::new(T::zero(), T::zero()); n];
        for i0 in 0..n {
            for i1 in 0..n {
                column[i1] = data[i1 * n + i0];
            }
            plan.process(&mut column);
            for i1 in 0..n {
                data[i1 * n + i0] = column[i1];
            }
        }
    }
}

/// Unnormalized discrete Fourier coefficients of a real grid function.
#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    grid: GridSpec<T>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn forward(grid: &GridSpec<T>, values: &[T]) -> Self {
        assert_eq!(values.len(), grid.len(), "field length does not match grid");
        let mut coeffs: Vec<Complex<T>> =
            values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        for axis in 0..grid.dim() {
            transform_axis(&mut coeffs, grid.points_per_dim(), grid.dim(), axis, false);
        }
        Self { grid: *grid, coeffs }
    }

    pub fn from_coeffs(grid: &GridSpec<T>, coeffs: Vec<Complex<T>>) -> Self {
        assert_eq!(coeffs.len(), grid.len());
        Self { grid: *grid, coeffs }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn mode(&self, idx: usize) -> Mode<T> {
        mode_of(&self.grid, idx)
    }

    /// Returns a new spectrum with every coefficient multiplied by `symbol`.
    pub fn multiply<F>(&self, symbol: F) -> Self
    where
        F: Fn(&Mode<T>) -> Complex<T>,
    {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c * symbol(&mode_of(&self.grid, idx)))
            .collect();
        Self { grid: self.grid, coeffs }
    }

    pub fn add_scaled(&mut self, other: &Self, scale: Complex<T>) {
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a += b * scale;
        }
    }

    /// Inverse transform, keeping the real part.
    pub fn to_real(&self) -> Vec<T> {
        let mut data = self.coeffs.clone();
        for axis in 0..self.grid.dim() {
            transform_axis(&mut data, self.grid.points_per_dim(), self.grid.dim(), axis, true);
        }
        let norm = T::one() / cst::<T>(self.grid.len() as f64);
        data.into_iter().map(|c| c.re * norm).collect()
    }

    /// Applies `symbol` and transforms back in one go.
    pub fn synthesize<F>(&self, symbol: F) -> Vec<T>
    where
        F: Fn(&Mode<T>) -> Complex<T>,
    {
        self.multiply(symbol).to_real()
    }
}

pub fn mode_of<T: Real>(grid: &GridSpec<T>, idx: usize) -> Mode<T> {
    let n = grid.points_per_dim();
    let ij = grid.unflatten(idx);
    let mut xi = [T::zero(); 2];
    let mut nyquist = [false; 2];
    for axis in 0..grid.dim() {
        xi[axis] = grid.wavenumber(ij[axis]);
        nyquist[axis] = ij[axis] == n / 2;
    }
    Mode { xi, nyquist, dim: grid.dim() }
}

/// Applies a Fourier multiplier to real grid values.
pub fn apply_symbol<T, F>(grid: &GridSpec<T>, values: &[T], symbol: F) -> Vec<T>
where
    T: Real,
    F: Fn(&Mode<T>) -> Complex<T>,
{
    Spectrum::forward(grid, values).synthesize(symbol)
}

/// Real-valued symbol as a complex number.
#[inline]
pub fn real_symbol<T: Real>(v: T) -> Complex<T> {
    Complex::new(v, T::zero())
}
