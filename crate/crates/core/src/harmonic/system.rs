//! Linear algebra for the lattice Dirichlet problem.
//!
//! For a set of free vertices `F` the discrete Laplace system is
//! `6·h(v) − Σ_{u∼v, u∈F} h(u) = Σ_{u∼v, u∉F} h(u)` for `v ∈ F`. The matrix is
//! symmetric positive definite; free vertices are kept in row-major order so
//! its envelope is roughly one lattice row wide.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::LatticeDomain;

pub(crate) const NO_SLOT: u32 = u32::MAX;

pub(crate) struct LaplaceSystem {
    /// Global indices of the free vertices, in row-major order.
    pub free: Vec<usize>,
    /// Global index -> position in `free`, or `NO_SLOT`.
    pub slot: Vec<u32>,
    /// Neighbour global indices of each free vertex.
    pub nbrs: Vec<[u32; 6]>,
}

impl LaplaceSystem {
    /// `absorbing[i]` marks vertices that are not solved for. Boundary
    /// vertices are always absorbing.
    pub fn new(domain: &LatticeDomain, absorbing: &[bool]) -> Self {
        let n = domain.n_vertices();
        let mut slot = vec![NO_SLOT; n];
        let mut free = Vec::new();
        for i in 0..domain.n_interior() {
            if !absorbing[i] {
                slot[i] = free.len() as u32;
                free.push(i);
            }
        }
        let nbrs = free.iter().map(|&i| *domain.interior_neighbors(i)).collect();
        Self { free, slot, nbrs }
    }

    pub fn len(&self) -> usize {
        self.free.len()
    }

    /// Right-hand side from the values of absorbing neighbours.
    pub fn rhs(&self, values: &[f64]) -> Vec<f64> {
        self.nbrs
            .iter()
            .map(|nb| {
                nb.iter()
                    .filter(|&&j| self.slot[j as usize] == NO_SLOT)
                    .map(|&j| values[j as usize])
                    .sum()
            })
            .collect()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, nb) in self.nbrs.iter().enumerate() {
            let mut s = 6.0 * x[i];
            for &j in nb {
                let k = self.slot[j as usize];
                if k != NO_SLOT {
                    s -= x[k as usize];
                }
            }
            out[i] = s;
        }
    }

    /// `max_i |b_i − (Ax)_i| / 6`, the mean-value defect.
    pub fn residual_inf(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut ax = vec![0.0; x.len()];
        self.apply(x, &mut ax);
        ax.iter().zip(b).map(|(a, b)| (b - a).abs()).fold(0.0, f64::max) / 6.0
    }
}

/// Envelope (skyline) Cholesky factorisation `A = L Lᵀ`.
pub(crate) struct SkylineCholesky {
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    pub fn factor(sys: &LaplaceSystem) -> Self {
        let n = sys.len();
        let mut first = vec![0usize; n];
        for i in 0..n {
            let mut f = i;
            for &j in &sys.nbrs[i] {
                let k = sys.slot[j as usize];
                if k != NO_SLOT && (k as usize) < f {
                    f = k as usize;
                }
            }
            first[i] = f;
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            data[start[i] + (i - first[i])] = 6.0;
            for &j in &sys.nbrs[i] {
                let k = sys.slot[j as usize];
                if k != NO_SLOT && (k as usize) < i {
                    data[start[i] + (k as usize - first[i])] = -1.0;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let (row_i, row_j) = {
                    let ri = &data[start[i] + (lo - fi)..start[i] + (j - fi)];
                    let rj = &data[start[j] + (lo - fj)..start[j] + (j - fj)];
                    (ri, rj)
                };
                let dot: f64 = row_i.iter().zip(row_j).map(|(a, b)| a * b).sum();
                let ljj = data[start[j] + (j - fj)];
                let idx = start[i] + (j - fi);
                data[idx] = (data[idx] - dot) / ljj;
            }
            let row = &data[start[i]..start[i] + (i - fi)];
            let sq: f64 = row.iter().map(|a| a * a).sum();
            let d = start[i] + (i - fi);
            data[d] = (data[d] - sq).sqrt();
        }
        Self { first, start, data }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[self.start[i]..self.start[i + 1]]
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.first.len();
        for i in 0..n {
            let row = self.row(i);
            let fi = self.first[i];
            let dot: f64 = row[..i - fi].iter().zip(&x[fi..i]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - dot) / row[i - fi];
        }
        for i in (0..n).rev() {
            let row = self.row(i);
            let fi = self.first[i];
            x[i] /= row[i - fi];
            let xi = x[i];
            for (k, l) in row[..i - fi].iter().enumerate() {
                x[fi + k] -= l * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

pub(crate) struct IterativeOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

pub(crate) fn conjugate_gradient(
    sys: &LaplaceSystem,
    b: &[f64],
    x0: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> IterativeOutcome {
    let n = sys.len();
    let mut x = x0;
    let mut ax = vec![0.0; n];
    sys.apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let inf = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs())) / 6.0;
    let mut residual = inf(&r);
    if residual <= tol {
        return IterativeOutcome { x, iterations: 0, residual, converged: true };
    }
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        sys.apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        residual = inf(&r);
        if residual <= tol {
            // guard against drift of the recursive residual
            residual = sys.residual_inf(&x, b);
            if residual <= tol {
                return IterativeOutcome { x, iterations: it, residual, converged: true };
            }
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    let residual = sys.residual_inf(&x, b);
    IterativeOutcome { x, iterations: max_iter, residual, converged: residual <= tol }
}

/// Gauss–Seidel sweeps with relaxation factor `omega` (1 is plain Gauss–Seidel).
pub(crate) fn gauss_seidel(
    sys: &LaplaceSystem,
    b: &[f64],
    x0: Vec<f64>,
    omega: f64,
    tol: f64,
    max_iter: usize,
) -> IterativeOutcome {
    let mut x = x0;
    let mut residual = sys.residual_inf(&x, b);
    if residual <= tol {
        return IterativeOutcome { x, iterations: 0, residual, converged: true };
    }
    for it in 1..=max_iter {
        let mut max_defect = 0.0f64;
        for i in 0..sys.len() {
            let mut s = b[i];
            for &j in &sys.nbrs[i] {
                let k = sys.slot[j as usize];
                if k != NO_SLOT {
                    s += x[k as usize];
                }
            }
            let target = s / 6.0;
            max_defect = max_defect.max((target - x[i]).abs());
            x[i] += omega * (target - x[i]);
        }
        // the defect seen during the sweep bounds the residual at its start
        if max_defect <= tol {
            residual = sys.residual_inf(&x, b);
            if residual <= tol {
                return IterativeOutcome { x, iterations: it, residual, converged: true };
            }
        }
    }
    residual = sys.residual_inf(&x, b);
    IterativeOutcome { x, iterations: max_iter, residual, converged: residual <= tol }
}

/// Estimates each free value by the mean absorbed value of independent walks.
pub(crate) fn monte_carlo(
    domain: &LatticeDomain,
    sys: &LaplaceSystem,
    values: &[f64],
    walks_per_vertex: usize,
    seed: u64,
) -> Vec<f64> {
    let mut out = vec![0.0; sys.len()];
    for (slot, &start) in sys.free.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(start as u64);
        let mut acc = 0.0;
        for _ in 0..walks_per_vertex {
            let mut cur = start;
            loop {
                let next = domain.interior_neighbors(cur)[rng.random_range(0..6)] as usize;
                if sys.slot[next] == NO_SLOT {
                    acc += values[next];
                    break;
                }
                cur = next;
            }
        }
        out[slot] = acc / walks_per_vertex as f64;
    }
    out
}
