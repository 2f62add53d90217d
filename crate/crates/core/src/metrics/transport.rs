use std::collections::VecDeque;

use crate::error::{invalid, Error, Result};
use crate::scalar::{to_f64, Real};
use crate::spectral::ScalarField;

/// Largest `m_a · m_b` accepted by [`wasserstein_discrete`].
pub const MAX_PLAN_ENTRIES: usize = 1_000_000;

const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Finitely supported probability measure in dimension 1 or 2.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    /// Row-major `m × dim`.
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.len() != dim * weights.len() {
            return invalid("points must be an m × dim array matching the weights");
        }
        if weights.is_empty() {
            return invalid("a discrete measure needs at least one atom");
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || points.iter().any(|p| !p.is_finite()) {
            return invalid("weights must be nonnegative and points finite");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return invalid(format!("weights sum to {total}, not 1"));
        }
        Ok(Self { dim, points, weights })
    }

    pub fn dirac(point: &[f64]) -> Result<Self> {
        Self::new(point.len(), point.to_vec(), vec![1.0])
    }

    /// Uniform weights on the given points.
    pub fn empirical(dim: usize, points: Vec<f64>) -> Result<Self> {
        let m = points.len() / dim.max(1);
        Self::new(dim, points, vec![1.0 / m as f64; m])
    }

    /// Lumps a grid density into `block^d` super-cells placed at their centers of mass,
    /// dropping cells whose mass is at most `threshold`, then renormalizes.
    pub fn from_density<T: Real>(rho: &ScalarField<T>, block: usize, threshold: f64) -> Result<Self> {
        let grid = rho.grid();
        let n = grid.points_per_dim();
        if block == 0 || n % block != 0 {
            return invalid(format!("block {block} must divide the grid size {n}"));
        }
        let d = grid.dim();
        let nb = n / block;
        let cells = nb.pow(d as u32);
        let mut mass = vec![0.0; cells];
        let mut moment = vec![[0.0f64; 2]; cells];
        let vol = to_f64(grid.cell_volume());
        for idx in 0..grid.len() {
            let ij = grid.unflatten(idx);
            let c = if d == 1 { ij[0] / block } else { (ij[1] / block) * nb + ij[0] / block };
            let w = to_f64(rho.values()[idx]).max(0.0) * vol;
            let p = grid.position(idx);
            mass[c] += w;
            moment[c][0] += w * to_f64(p[0]);
            moment[c][1] += w * to_f64(p[1]);
        }
        let total: f64 = mass.iter().filter(|m| **m > threshold).sum();
        if !(total > 0.0) {
            return invalid("no cell exceeds the mass threshold");
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for c in 0..cells {
            if mass[c] > threshold {
                for axis in 0..d {
                    points.push(moment[c][axis] / mass[c]);
                }
                weights.push(mass[c] / total);
            }
        }
        let s: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= s);
        Self::new(d, points, weights)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn cost_matrix(a: &DiscreteMeasure, b: &DiscreteMeasure, q: f64) -> Vec<f64> {
    let mut c = Vec::with_capacity(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            let d2: f64 = a.point(i).iter().zip(b.point(j)).map(|(x, y)| (x - y).powi(2)).sum();
            c.push(d2.sqrt().powf(q));
        }
    }
    c
}

/// Optimal plan of a transportation problem with `m + n - 1` basic cells.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    /// `(i, j, mass)` over basic cells (some may carry zero mass).
    pub entries: Vec<(usize, usize, f64)>,
    pub cost: f64,
    pub pivots: usize,
}

/// Transportation simplex: north-west corner start, potentials, most-negative pricing.
fn solve_transport(supply: &[f64], demand: &[f64], cost: &[f64]) -> TransportPlan {
    let (m, n) = (supply.len(), demand.len());
    let mut a = supply.to_vec();
    let mut b = demand.to_vec();
    let mut basis: Vec<(usize, usize, f64)> = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let x = a[i].min(b[j]);
        basis.push((i, j, x));
        a[i] -= x;
        b[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if j == n - 1 || (i < m - 1 && a[i] <= b[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }
    let scale = cost.iter().fold(0.0f64, |s, c| s.max(c.abs())).max(1e-300);
    let tol = 1e-13 * scale;
    let mut pivots = 0;
    let max_pivots = 50 * (m + n) * (m + n).max(10);
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    // Adjacency of the basis tree: node k < m is row k, node m + j is column j.
    loop {
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m + n];
        for (e, &(r, c, _)) in basis.iter().enumerate() {
            adj[r].push((m + c, e));
            adj[m + c].push((r, e));
        }
        let mut seen = vec![false; m + n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        u[0] = 0.0;
        while let Some(k) = queue.pop_front() {
            for &(nb, e) in &adj[k] {
                if seen[nb] {
                    continue;
                }
                seen[nb] = true;
                let (r, c, _) = basis[e];
                if nb >= m {
                    v[c] = cost[r * n + c] - u[r];
                } else {
                    u[r] = cost[r * n + c] - v[c];
                }
                queue.push_back(nb);
            }
        }
        let mut best = (-tol, usize::MAX, usize::MAX);
        for r in 0..m {
            for c in 0..n {
                let rc = cost[r * n + c] - u[r] - v[c];
                if rc < best.0 {
                    best = (rc, r, c);
                }
            }
        }
        if best.1 == usize::MAX || pivots >= max_pivots {
            break;
        }
        pivots += 1;
        let (er, ec) = (best.1, best.2);
        // Tree path from column ec to row er closes the cycle with the entering cell.
        let mut parent = vec![(usize::MAX, usize::MAX); m + n];
        let mut seen = vec![false; m + n];
        let mut queue = VecDeque::from([m + ec]);
        seen[m + ec] = true;
        while let Some(k) = queue.pop_front() {
            if k == er {
                break;
            }
            for &(nb, e) in &adj[k] {
                if !seen[nb] {
                    seen[nb] = true;
                    parent[nb] = (k, e);
                    queue.push_back(nb);
                }
            }
        }
        // Walking back from row er: edges alternate minus, plus, minus, ...
        let mut path = Vec::new();
        let mut k = er;
        while k != m + ec {
            let (p, e) = parent[k];
            path.push(e);
            k = p;
        }
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (pos, &e) in path.iter().enumerate() {
            if pos % 2 == 0 && basis[e].2 < theta {
                theta = basis[e].2;
                leave = e;
            }
        }
        for (pos, &e) in path.iter().enumerate() {
            if pos % 2 == 0 {
                basis[e].2 -= theta;
            } else {
                basis[e].2 += theta;
            }
        }
        basis[leave] = (er, ec, theta);
    }
    let total = basis.iter().map(|&(r, c, x)| x * cost[r * n + c]).sum();
    TransportPlan { entries: basis, cost: total, pivots }
}

/// Exact `W_q` between discrete measures by the transportation simplex.
pub fn wasserstein_discrete(a: &DiscreteMeasure, b: &DiscreteMeasure, q: f64) -> Result<f64> {
    Ok(optimal_plan(a, b, q)?.cost.max(0.0).powf(1.0 / q))
}

/// The optimal coupling itself (cost is `W_q^q`).
pub fn optimal_plan(a: &DiscreteMeasure, b: &DiscreteMeasure, q: f64) -> Result<TransportPlan> {
    if !(q >= 1.0) || !q.is_finite() {
        return invalid(format!("Wasserstein order must be finite and >= 1, got {q}"));
    }
    if a.dim() != b.dim() {
        return Err(Error::WrongDimension { expected: a.dim(), got: b.dim() });
    }
    let size = a.len() * b.len();
    if size > MAX_PLAN_ENTRIES {
        return Err(Error::TooLarge { size, cap: MAX_PLAN_ENTRIES });
    }
    Ok(solve_transport(a.weights(), b.weights(), &cost_matrix(a, b, q)))
}

/// `W_q^q` by enumerating every basis of the transportation polytope; an oracle for tiny instances.
pub fn transport_cost_enumerate(a: &DiscreteMeasure, b: &DiscreteMeasure, q: f64) -> Result<f64> {
    let (m, n) = (a.len(), b.len());
    let k = m + n - 1;
    let cells = m * n;
    let combos = binomial(cells, k);
    const CAP: usize = 5_000_000;
    if combos > CAP as f64 {
        return Err(Error::TooLarge { size: combos as usize, cap: CAP });
    }
    let cost = cost_matrix(a, b, q);
    let mut best = f64::INFINITY;
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        if let Some(x) = basic_solution(&pick, m, n, a.weights(), b.weights()) {
            if x.iter().all(|v| *v >= -1e-14) {
                let c: f64 = pick.iter().zip(&x).map(|(&cell, v)| v * cost[cell]).sum();
                best = best.min(c);
            }
        }
        // Next k-subset in lexicographic order.
        let mut t = k;
        while t > 0 && pick[t - 1] == cells - k + t - 1 {
            t -= 1;
        }
        if t == 0 {
            break;
        }
        pick[t - 1] += 1;
        for s in t..k {
            pick[s] = pick[s - 1] + 1;
        }
    }
    Ok(best)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Flows on a spanning tree of cells by repeated leaf elimination; `None` if not a spanning tree.
fn basic_solution(pick: &[usize], m: usize, n: usize, supply: &[f64], demand: &[f64]) -> Option<Vec<f64>> {
    let mut rem: Vec<f64> = supply.iter().chain(demand).copied().collect();
    let mut degree = vec![0usize; m + n];
    for &cell in pick {
        degree[cell / n] += 1;
        degree[m + cell % n] += 1;
    }
    let mut x = vec![f64::NAN; pick.len()];
    let mut done = vec![false; pick.len()];
    for _ in 0..pick.len() {
        let leaf = (0..pick.len()).find(|&e| {
            !done[e] && (degree[pick[e] / n] == 1 || degree[m + pick[e] % n] == 1)
        })?;
        let (r, c) = (pick[leaf] / n, m + pick[leaf] % n);
        let node = if degree[r] == 1 { r } else { c };
        let other = if node == r { c } else { r };
        x[leaf] = rem[node];
        rem[other] -= rem[node];
        rem[node] = 0.0;
        degree[r] -= 1;
        degree[c] -= 1;
        done[leaf] = true;
    }
    if rem.iter().any(|v| v.abs() > 1e-12) {
        return None;
    }
    Some(x)
}
