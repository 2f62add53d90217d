use crate::error::{invalid, Result};
use crate::scalar::{cst, to_f64, Real};
use crate::spectral::GridSpec;

/// Radius of every window.
pub const BALL_RADIUS: f64 = 1.0;

/// Largest allowed spacing between window centers.
pub const MAX_CENTER_SPACING: f64 = 0.5;

/// Supersampling per axis used to compute cell/ball overlaps in 2D.
const SUPERSAMPLE: usize = 8;

/// Unit balls centered on a sub-lattice of the grid.
///
/// The window stencil is the same for every center, so it is stored once as
/// grid offsets with the fraction of each cell that lies inside the ball.
#[derive(Debug, Clone)]
pub struct BallLattice {
    dim: usize,
    n: usize,
    stride: usize,
    spacing: f64,
    cell_volume: f64,
    stencil: Vec<([i64; 2], f64)>,
}

impl BallLattice {
    pub fn new<T: Real>(grid: &GridSpec<T>) -> Result<Self> {
        let h = to_f64(grid.spacing());
        let extent = to_f64(grid.extent());
        if extent <= 2.0 * BALL_RADIUS {
            return invalid(format!("torus extent {extent} must exceed the ball diameter 2"));
        }
        let stride = (MAX_CENTER_SPACING / h).floor() as usize;
        if stride == 0 {
            return invalid(format!("grid spacing {h} exceeds the lattice spacing bound 0.5"));
        }
        let n = grid.points_per_dim();
        let stride = stride.min(n);
        let dim = grid.dim();
        let reach = (BALL_RADIUS / h).ceil() as i64 + 1;
        let mut stencil = Vec::new();
        if dim == 1 {
            for o in -reach..=reach {
                let x = o as f64 * h;
                let lo = (x - h / 2.0).max(-BALL_RADIUS);
                let hi = (x + h / 2.0).min(BALL_RADIUS);
                let w = ((hi - lo) / h).clamp(0.0, 1.0);
                if w > 0.0 {
                    stencil.push(([o, 0], w));
                }
            }
        } else {
            let ss = SUPERSAMPLE as f64;
            for o1 in -reach..=reach {
                for o0 in -reach..=reach {
                    let (cx, cy) = (o0 as f64 * h, o1 as f64 * h);
                    let mut hits = 0usize;
                    for a in 0..SUPERSAMPLE {
                        for b in 0..SUPERSAMPLE {
                            let x = cx + h * ((a as f64 + 0.5) / ss - 0.5);
                            let y = cy + h * ((b as f64 + 0.5) / ss - 0.5);
                            if x * x + y * y <= BALL_RADIUS * BALL_RADIUS {
                                hits += 1;
                            }
                        }
                    }
                    if hits > 0 {
                        stencil.push(([o0, o1], hits as f64 / (ss * ss)));
                    }
                }
            }
        }
        Ok(Self {
            dim,
            n,
            stride,
            spacing: h,
            cell_volume: h.powi(dim as i32),
            stencil,
        })
    }

    /// Distance between neighbouring centers.
    pub fn center_spacing(&self) -> f64 {
        self.stride as f64 * self.spacing
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn radius(&self) -> f64 {
        BALL_RADIUS
    }

    fn centers_per_axis(&self) -> usize {
        self.n.div_ceil(self.stride)
    }

    pub fn num_centers(&self) -> usize {
        self.centers_per_axis().pow(self.dim as u32)
    }

    /// Grid indices of the centers (second entry zero in 1D).
    pub fn centers(&self) -> Vec<[usize; 2]> {
        let m = self.centers_per_axis();
        if self.dim == 1 {
            (0..m).map(|a| [a * self.stride, 0]).collect()
        } else {
            (0..m)
                .flat_map(|b| (0..m).map(move |a| [a * self.stride, b * self.stride]))
                .collect()
        }
    }

    fn flat(&self, c: [usize; 2], o: [i64; 2]) -> usize {
        let n = self.n as i64;
        let i0 = (c[0] as i64 + o[0]).rem_euclid(n) as usize;
        if self.dim == 1 {
            i0
        } else {
            let i1 = (c[1] as i64 + o[1]).rem_euclid(n) as usize;
            i1 * self.n + i0
        }
    }

    /// `‖1_{B(c,1)} v‖_{L^k}` by weighted grid quadrature (`k = ∞` takes the max over points in the ball).
    pub fn window_norm<T: Real>(&self, values: &[T], center: [usize; 2], k: f64) -> T {
        if k.is_infinite() {
            let r2 = BALL_RADIUS * BALL_RADIUS + 1e-12;
            return self
                .stencil
                .iter()
                .filter(|(o, _)| {
                    let (x, y) = (o[0] as f64 * self.spacing, o[1] as f64 * self.spacing);
                    x * x + y * y <= r2
                })
                .fold(T::zero(), |m, (o, _)| m.max(values[self.flat(center, *o)].abs()));
        }
        let kt: T = cst(k);
        let sum: T = self
            .stencil
            .iter()
            .map(|(o, w)| cst::<T>(*w) * values[self.flat(center, *o)].abs().powf(kt))
            .sum();
        (sum * cst(self.cell_volume)).powf(T::one() / kt)
    }

    /// Max over centers of [`Self::window_norm`].
    pub fn sup_window_norm<T: Real>(&self, values: &[T], k: f64) -> T {
        self.centers()
            .into_iter()
            .map(|c| self.window_norm(values, c, k))
            .fold(T::zero(), |m, v| m.max(v))
    }

    /// Index of the center whose window maximizes the `L^k` norm, with that norm.
    pub fn argmax_window<T: Real>(&self, values: &[T], k: f64) -> ([usize; 2], T) {
        self.centers()
            .into_iter()
            .map(|c| (c, self.window_norm(values, c, k)))
            .fold(([0, 0], T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best })
    }

    /// Grid points of the window around `center` with positive overlap weight.
    pub fn window_indices(&self, center: [usize; 2]) -> Vec<usize> {
        self.stencil.iter().map(|(o, _)| self.flat(center, *o)).collect()
    }

    /// Grid points per axis of a partition cell: the largest cube inside a unit ball
    /// (side `2R/√d`) rounded down to whole grid cells.
    pub fn partition_width(&self) -> usize {
        let side = 2.0 * BALL_RADIUS / (self.dim as f64).sqrt();
        ((side / self.spacing + 1e-9).floor() as usize).clamp(1, self.n)
    }

    /// Offsets (in grid points, per axis) of the partitions tried by the amalgam bound.
    pub fn partition_shifts(&self) -> Vec<[usize; 2]> {
        let w = self.partition_width();
        let mut per_axis: Vec<usize> = (0..4).map(|q| q * w / 4).collect();
        per_axis.dedup();
        if self.dim == 1 {
            per_axis.iter().map(|&s| [s, 0]).collect()
        } else {
            per_axis.iter().flat_map(|&a| per_axis.iter().map(move |&b| [a, b])).collect()
        }
    }

    /// Cell of every grid point in the partition shifted by `shift`, and the number of cells.
    /// Every cell fits in a unit ball.
    pub fn partition(&self, shift: [usize; 2]) -> (Vec<usize>, usize) {
        let w = self.partition_width();
        let m = self.n.div_ceil(w);
        let axis = |i: usize, s: usize| ((i + s) % self.n) / w;
        let total = self.n.pow(self.dim as u32);
        let cells = (0..total)
            .map(|idx| {
                if self.dim == 1 {
                    axis(idx, shift[0])
                } else {
                    axis(idx / self.n, shift[1]) * m + axis(idx % self.n, shift[0])
                }
            })
            .collect();
        (cells, m.pow(self.dim as u32))
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }
}
