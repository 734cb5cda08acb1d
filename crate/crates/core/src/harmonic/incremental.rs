//! Incremental harmonic extension for long explorer runs.
//!
//! With `K = A⁻¹` the inverse of the interior Laplace matrix and `h₀` the
//! extension of the boundary data alone, the extension that additionally takes
//! values `c` on an interior set `S` is
//!
//! ```text
//! h(x) = h₀(x) + K[x,S] · K[S,S]⁻¹ · (c − h₀[S]).
//! ```
//!
//! [`IncrementalExtension`] keeps a Cholesky factor `L` of `K[S,S]` and the
//! vector `y = L⁻¹(c − h₀[S])`; then `h(x) = h₀(x) + (L⁻¹K[S,x]) · y`, and
//! fixing one more vertex appends one row to `L` and one entry to `y`. A query
//! costs `O(|S|²)` and the result is exact up to rounding. Columns of `K` are
//! computed on demand and shared between all extensions built on one table,
//! which makes the table the natural thing to share across an ensemble.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use super::system::{LaplaceSystem, SkylineCholesky, NO_SLOT};
use crate::lattice::LatticeDomain;

/// Lazily filled columns of the inverse interior Laplace matrix.
pub struct GreenTable {
    domain: Arc<LatticeDomain>,
    factor: SkylineCholesky,
    base: Vec<f64>,
    /// Interior index -> slot in the window, or `NO_SLOT`.
    window: Vec<u32>,
    window_members: Vec<usize>,
    columns: Vec<OnceLock<Box<[f64]>>>,
}

impl GreenTable {
    /// Table whose columns are stored over the whole interior.
    pub fn new(domain: &Arc<LatticeDomain>) -> Self {
        let all: Vec<usize> = (0..domain.n_interior()).collect();
        Self::build(domain, all)
    }

    /// Columns of vertices within `radius` of `center` are stored only over
    /// that disc; columns of vertices outside it are stored in full. Use this
    /// on large domains when the fixed set stays near `center`.
    pub fn with_window(domain: &Arc<LatticeDomain>, center: Complex64, radius: f64) -> Self {
        let members: Vec<usize> =
            (0..domain.n_interior()).filter(|&i| (domain.vertex(i).embed() - center).norm() <= radius).collect();
        Self::build(domain, members)
    }

    fn build(domain: &Arc<LatticeDomain>, members: Vec<usize>) -> Self {
        let ni = domain.n_interior();
        let absorbing: Vec<bool> = (0..domain.n_vertices()).map(|i| i >= ni).collect();
        let system = LaplaceSystem::new(domain, &absorbing);
        let factor = SkylineCholesky::factor(&system);
        let mut base: Vec<f64> = (0..domain.n_vertices()).map(|i| domain.h0_at(i).map_or(0.0, f64::from)).collect();
        let x = factor.solve(&system.rhs(&base));
        base[..ni].copy_from_slice(&x);
        let mut window = vec![NO_SLOT; ni];
        for (k, &i) in members.iter().enumerate() {
            window[i] = k as u32;
        }
        Self {
            domain: Arc::clone(domain),
            factor,
            base,
            window,
            window_members: members,
            columns: (0..ni).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn domain(&self) -> &Arc<LatticeDomain> {
        &self.domain
    }

    /// Harmonic extension of the boundary colouring, indexed like the domain.
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn columns_computed(&self) -> usize {
        self.columns.iter().filter(|c| c.get().is_some()).count()
    }

    fn column(&self, x: usize) -> &[f64] {
        self.columns[x].get_or_init(|| {
            let mut e = vec![0.0; self.domain.n_interior()];
            e[x] = 1.0;
            self.factor.solve_in_place(&mut e);
            if self.window[x] == NO_SLOT {
                e.into_boxed_slice()
            } else {
                self.window_members.iter().map(|&i| e[i]).collect()
            }
        })
    }

    /// `K(s, x)` for interior indices.
    fn entry(&self, s: usize, x: usize) -> f64 {
        let cx = self.column(x);
        if self.window[x] == NO_SLOT {
            return cx[s];
        }
        match self.window[s] {
            NO_SLOT => self.column(s)[x],
            k => cx[k as usize],
        }
    }

    /// Fills `out[j] = K(set[j], x)`.
    fn gather(&self, set: &[usize], x: usize, out: &mut Vec<f64>) {
        out.clear();
        let cx = self.column(x);
        if self.window[x] == NO_SLOT {
            out.extend(set.iter().map(|&s| cx[s]));
        } else {
            out.extend(set.iter().map(|&s| match self.window[s] {
                NO_SLOT => self.column(s)[x],
                k => cx[k as usize],
            }));
        }
    }
}

/// Harmonic extension of the boundary colouring plus a growing set of fixed
/// interior values.
#[derive(Clone)]
pub struct IncrementalExtension {
    table: Arc<GreenTable>,
    set: Vec<usize>,
    /// Row-packed lower triangle of `L`; row `j` has `j + 1` entries.
    lower: Vec<f64>,
    y: Vec<f64>,
    fixed: Vec<Option<f64>>,
    /// `L⁻¹ K[S,x]` from the last query, reused by a following `fix(x)`.
    cache: Option<(usize, Vec<f64>)>,
    scratch: Vec<f64>,
}

impl IncrementalExtension {
    pub fn new(table: Arc<GreenTable>) -> Self {
        let n = table.domain.n_interior();
        Self {
            table,
            set: Vec::new(),
            lower: Vec::new(),
            y: Vec::new(),
            fixed: vec![None; n],
            cache: None,
            scratch: Vec::new(),
        }
    }

    pub fn table(&self) -> &Arc<GreenTable> {
        &self.table
    }

    /// Number of interior vertices fixed so far.
    pub fn fixed_count(&self) -> usize {
        self.set.len()
    }

    pub fn reset(&mut self) {
        for &s in &self.set {
            self.fixed[s] = None;
        }
        self.set.clear();
        self.lower.clear();
        self.y.clear();
        self.cache = None;
    }

    fn forward(&mut self, x: usize) -> Vec<f64> {
        let mut u = std::mem::take(&mut self.scratch);
        self.table.gather(&self.set, x, &mut u);
        let mut off = 0;
        for j in 0..u.len() {
            let row = &self.lower[off..off + j + 1];
            let dot: f64 = row[..j].iter().zip(&u[..j]).map(|(a, b)| a * b).sum();
            u[j] = (u[j] - dot) / row[j];
            off += j + 1;
        }
        u
    }

    /// Current value at vertex index `i` (any vertex of the domain).
    pub fn value(&mut self, i: usize) -> f64 {
        let ni = self.fixed.len();
        if i >= ni {
            return self.table.base[i];
        }
        if let Some(c) = self.fixed[i] {
            return c;
        }
        let u = self.forward(i);
        let v = self.table.base[i] + u.iter().zip(&self.y).map(|(a, b)| a * b).sum::<f64>();
        if let Some((_, old)) = self.cache.replace((i, u)) {
            self.scratch = old;
        }
        v
    }

    /// Fixes interior vertex `i` at `c`. Fixing an already fixed vertex is a
    /// no-op.
    pub fn fix(&mut self, i: usize, c: f64) {
        if self.fixed[i].is_some() {
            return;
        }
        let u = match self.cache.take() {
            Some((j, u)) if j == i => u,
            other => {
                if let Some((_, old)) = other {
                    self.scratch = old;
                }
                self.forward(i)
            }
        };
        let uy: f64 = u.iter().zip(&self.y).map(|(a, b)| a * b).sum();
        let p = self.table.base[i] + uy;
        let d2 = self.table.entry(i, i) - u.iter().map(|a| a * a).sum::<f64>();
        let d = d2.max(f64::MIN_POSITIVE).sqrt();
        self.lower.extend_from_slice(&u);
        self.lower.push(d);
        self.y.push((c - p) / d);
        self.set.push(i);
        self.fixed[i] = Some(c);
        self.scratch = u;
    }
}
