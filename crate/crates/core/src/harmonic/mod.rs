//! Discrete harmonic extensions, Green's functions and harmonic measure on
//! lattice domains.
//!
//! A function is harmonic at a vertex when its value there is the mean of its
//! six neighbours. Given values on a determined set of vertices (always
//! including the boundary cycle), [`harmonic_extension`] produces the unique
//! extension harmonic at every other interior vertex.

mod incremental;
mod system;

use std::collections::HashSet;
use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{DirectedEdge, EdgeKind, LatticeDomain, LatticeVertex};

pub use incremental::{GreenTable, IncrementalExtension};
pub(crate) use system::{LaplaceSystem, SkylineCholesky};

#[derive(Debug, Error)]
pub enum HarmonicError {
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("boundary vertex {0} has no fixed value")]
    BoundaryNotFixed(LatticeVertex),
    #[error("vertex {vertex} already fixed at {old}, cannot refix at {new}")]
    Contradiction { vertex: LatticeVertex, old: f64, new: f64 },
    #[error("vertex {0} is not in the domain")]
    UnknownVertex(LatticeVertex),
    #[error("vertex {0} is not free")]
    NotFree(LatticeVertex),
    #[error("edge {tail} -> {head}: {reason}")]
    MalformedEdge { tail: LatticeVertex, head: LatticeVertex, reason: &'static str },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SolverMethod {
    DirectSparse,
    ConjugateGradient,
    /// Gauss–Seidel sweeps with over-relaxation factor `omega` (1 = plain).
    GaussSeidel { omega: f64 },
    /// Random-walk estimate; a cross-check only, never exact.
    MonteCarlo { walks_per_vertex: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Bound on the mean-value defect `max |h(v) − mean of neighbours|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub warm_start: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: SolverMethod::ConjugateGradient,
            tolerance: 1e-10,
            max_iterations: 100_000,
            warm_start: true,
        }
    }
}

impl SolverConfig {
    pub fn direct() -> Self {
        Self { method: SolverMethod::DirectSparse, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), HarmonicError> {
        if !(self.tolerance > 0.0) {
            return Err(HarmonicError::InvalidConfig("tolerance must be positive".into()));
        }
        match self.method {
            SolverMethod::GaussSeidel { omega } if !(omega > 0.0 && omega < 2.0) => {
                Err(HarmonicError::InvalidConfig("relaxation factor must lie in (0, 2)".into()))
            }
            SolverMethod::MonteCarlo { walks_per_vertex: 0, .. } => {
                Err(HarmonicError::InvalidConfig("monte carlo needs at least one walk".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Values prescribed on a subset of the vertices of a domain.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedValues {
    values: Vec<Option<f64>>,
}

impl FixedValues {
    pub fn empty(domain: &LatticeDomain) -> Self {
        Self { values: vec![None; domain.n_vertices()] }
    }

    /// The 0/1 boundary colouring of the domain.
    pub fn h0(domain: &LatticeDomain) -> Self {
        let values = (0..domain.n_vertices()).map(|i| domain.h0_at(i).map(f64::from)).collect();
        Self { values }
    }

    pub fn set(&mut self, domain: &LatticeDomain, v: LatticeVertex, value: f64) -> Result<(), HarmonicError> {
        let i = domain.index_of(v).ok_or(HarmonicError::UnknownVertex(v))?;
        self.values[i] = Some(value);
        Ok(())
    }

    pub(crate) fn set_index(&mut self, i: usize, value: f64) {
        self.values[i] = Some(value);
    }

    pub fn get_index(&self, i: usize) -> Option<f64> {
        self.values[i]
    }

    pub fn is_fixed_index(&self, i: usize) -> bool {
        self.values[i].is_some()
    }

    pub fn len(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn absorbing_mask(&self) -> Vec<bool> {
        self.values.iter().map(Option::is_some).collect()
    }
}

/// A function on the closed domain that is harmonic off its fixed set.
#[derive(Clone, Debug)]
pub struct HarmonicField {
    domain: Arc<LatticeDomain>,
    fixed: FixedValues,
    values: Vec<f64>,
    iterations: usize,
}

impl HarmonicField {
    pub fn domain(&self) -> &Arc<LatticeDomain> {
        &self.domain
    }

    pub fn fixed(&self) -> &FixedValues {
        &self.fixed
    }

    /// Values indexed like the domain's vertices.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, v: LatticeVertex) -> Option<f64> {
        self.domain.index_of(v).map(|i| self.values[i])
    }

    pub fn value_at(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Iterations used by the solve that produced this field (0 for direct).
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Largest mean-value defect over free vertices.
    pub fn mean_value_defect(&self) -> f64 {
        (0..self.domain.n_interior())
            .filter(|&i| !self.fixed.is_fixed_index(i))
            .map(|i| {
                let mean: f64 =
                    self.domain.interior_neighbors(i).iter().map(|&j| self.values[j as usize]).sum::<f64>() / 6.0;
                (self.values[i] - mean).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Writes the `HEFIELD 1` diagnostic dump.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "HEFIELD 1")?;
        for i in 0..self.domain.n_vertices() {
            let v = self.domain.vertex(i);
            writeln!(out, "{} {} {}", v.a, v.b, self.values[i])?;
        }
        Ok(())
    }
}

fn solve_system(
    domain: &LatticeDomain,
    fixed: &FixedValues,
    cfg: &SolverConfig,
    initial: Option<&[f64]>,
) -> Result<(Vec<f64>, usize), HarmonicError> {
    cfg.validate()?;
    for i in domain.n_interior()..domain.n_vertices() {
        if !fixed.is_fixed_index(i) {
            return Err(HarmonicError::BoundaryNotFixed(domain.vertex(i)));
        }
    }
    let mut values: Vec<f64> = fixed.values.iter().map(|v| v.unwrap_or(0.0)).collect();
    let sys = LaplaceSystem::new(domain, &fixed.absorbing_mask());
    if sys.len() == 0 {
        return Ok((values, 0));
    }
    let b = sys.rhs(&values);
    let x0 = || match initial {
        Some(prev) if cfg.warm_start => sys.free.iter().map(|&i| prev[i]).collect(),
        _ => vec![0.0; sys.len()],
    };
    let (x, iterations) = match cfg.method {
        SolverMethod::DirectSparse => (SkylineCholesky::factor(&sys).solve(&b), 0),
        SolverMethod::ConjugateGradient => {
            let out = system::conjugate_gradient(&sys, &b, x0(), cfg.tolerance, cfg.max_iterations);
            if !out.converged {
                return Err(HarmonicError::NotConverged { iterations: out.iterations, residual: out.residual });
            }
            (out.x, out.iterations)
        }
        SolverMethod::GaussSeidel { omega } => {
            let out = system::gauss_seidel(&sys, &b, x0(), omega, cfg.tolerance, cfg.max_iterations);
            if !out.converged {
                return Err(HarmonicError::NotConverged { iterations: out.iterations, residual: out.residual });
            }
            (out.x, out.iterations)
        }
        SolverMethod::MonteCarlo { walks_per_vertex, seed } => {
            (system::monte_carlo(domain, &sys, &values, walks_per_vertex, seed), walks_per_vertex)
        }
    };
    for (k, &i) in sys.free.iter().enumerate() {
        values[i] = x[k];
    }
    Ok((values, iterations))
}

/// The discrete harmonic extension of `fixed`. Every boundary vertex must be
/// fixed.
pub fn harmonic_extension(
    domain: &Arc<LatticeDomain>,
    fixed: &FixedValues,
    cfg: &SolverConfig,
) -> Result<HarmonicField, HarmonicError> {
    let (values, iterations) = solve_system(domain, fixed, cfg, None)?;
    Ok(HarmonicField { domain: Arc::clone(domain), fixed: fixed.clone(), values, iterations })
}

/// Adds `v` to the fixed set with the given value and re-solves; with
/// `cfg.warm_start` the previous solution seeds iterative methods.
pub fn refix(
    field: &HarmonicField,
    v: LatticeVertex,
    value: f64,
    cfg: &SolverConfig,
) -> Result<HarmonicField, HarmonicError> {
    let i = field.domain.index_of(v).ok_or(HarmonicError::UnknownVertex(v))?;
    refix_index(field, i, value, cfg)
}

pub(crate) fn refix_index(
    field: &HarmonicField,
    i: usize,
    value: f64,
    cfg: &SolverConfig,
) -> Result<HarmonicField, HarmonicError> {
    if let Some(old) = field.fixed.get_index(i) {
        if old != value {
            return Err(HarmonicError::Contradiction { vertex: field.domain.vertex(i), old, new: value });
        }
        return Ok(field.clone());
    }
    let mut fixed = field.fixed.clone();
    fixed.set_index(i, value);
    let (values, iterations) = solve_system(&field.domain, &fixed, cfg, Some(&field.values))?;
    Ok(HarmonicField { domain: Arc::clone(&field.domain), fixed, values, iterations })
}

/// Dense Green's function: expected visits to each vertex.
#[derive(Clone, Debug)]
pub struct GreenFunction {
    domain: Arc<LatticeDomain>,
    values: Vec<f64>,
}

impl GreenFunction {
    pub fn get(&self, v: LatticeVertex) -> f64 {
        self.domain.index_of(v).map(|i| self.values[i]).unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Factorised Dirichlet problem for a domain with an extra absorbing set
/// ("killed" vertices, which absorb like the boundary).
pub struct LaplaceSolver {
    domain: Arc<LatticeDomain>,
    absorbing: Vec<bool>,
    system: LaplaceSystem,
    factor: SkylineCholesky,
}

impl LaplaceSolver {
    pub fn new(domain: &Arc<LatticeDomain>, killed: &HashSet<LatticeVertex>) -> Result<Self, HarmonicError> {
        let mut absorbing: Vec<bool> = (0..domain.n_vertices()).map(|i| !domain.is_interior_index(i)).collect();
        for &k in killed {
            let i = domain.index_of(k).ok_or(HarmonicError::UnknownVertex(k))?;
            absorbing[i] = true;
        }
        Ok(Self::from_mask(domain, absorbing))
    }

    pub(crate) fn from_mask(domain: &Arc<LatticeDomain>, absorbing: Vec<bool>) -> Self {
        let system = LaplaceSystem::new(domain, &absorbing);
        let factor = SkylineCholesky::factor(&system);
        Self { domain: Arc::clone(domain), absorbing, system, factor }
    }

    pub fn domain(&self) -> &Arc<LatticeDomain> {
        &self.domain
    }

    pub fn is_absorbing_index(&self, i: usize) -> bool {
        self.absorbing[i]
    }

    pub fn is_free(&self, v: LatticeVertex) -> bool {
        self.domain.index_of(v).map(|i| !self.absorbing[i]).unwrap_or(false)
    }

    /// Green's function from `v`: `G(u)` is the expected number of visits to
    /// `u` (time 0 included) before absorption; zero on the absorbing set.
    pub fn green(&self, v: LatticeVertex) -> Result<GreenFunction, HarmonicError> {
        let i = self.domain.index_of(v).ok_or(HarmonicError::UnknownVertex(v))?;
        if self.absorbing[i] {
            return Err(HarmonicError::NotFree(v));
        }
        let mut rhs = vec![0.0; self.system.len()];
        rhs[self.system.slot[i] as usize] = 6.0;
        self.factor.solve_in_place(&mut rhs);
        let mut values = vec![0.0; self.domain.n_vertices()];
        for (k, &g) in self.system.free.iter().enumerate() {
            values[g] = rhs[k];
        }
        Ok(GreenFunction { domain: Arc::clone(&self.domain), values })
    }

    /// Harmonic extension of values given on the absorbing set.
    pub(crate) fn dirichlet(&self, absorbing_values: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut values: Vec<f64> =
            (0..self.domain.n_vertices()).map(|i| if self.absorbing[i] { absorbing_values(i) } else { 0.0 }).collect();
        if self.system.len() == 0 {
            return values;
        }
        let b = self.system.rhs(&values);
        let x = self.factor.solve(&b);
        for (k, &g) in self.system.free.iter().enumerate() {
            values[g] = x[k];
        }
        values
    }

    /// Solves `A x = source` on the free vertices; `source` and the result
    /// are indexed like the domain (the result is 0 on absorbing vertices).
    pub(crate) fn solve_source(&self, source: &[f64]) -> Vec<f64> {
        let mut rhs: Vec<f64> = self.system.free.iter().map(|&i| source[i]).collect();
        self.factor.solve_in_place(&mut rhs);
        let mut out = vec![0.0; self.domain.n_vertices()];
        for (k, &i) in self.system.free.iter().enumerate() {
            out[i] = rhs[k];
        }
        out
    }

    /// Checks that `e` is an exit edge: inside the domain, head absorbing.
    pub fn check_exit_edge(&self, e: &DirectedEdge) -> Result<(), HarmonicError> {
        let err = |reason| HarmonicError::MalformedEdge { tail: e.tail, head: e.head, reason };
        if !e.tail.is_adjacent(e.head) {
            return Err(err("endpoints are not adjacent"));
        }
        if self.domain.edge_kind(e.tail, e.head) != EdgeKind::Inside {
            return Err(err("edge interior does not meet the domain"));
        }
        let h = self.domain.index_of(e.head).ok_or(err("head outside the domain"))?;
        if !self.absorbing[h] {
            return Err(err("head is not on the boundary or killed set"));
        }
        Ok(())
    }

    /// Probability that a walk from `v` is absorbed through an edge of `edges`.
    pub fn harmonic_measure_edges(&self, v: LatticeVertex, edges: &[DirectedEdge]) -> Result<f64, HarmonicError> {
        for e in edges {
            self.check_exit_edge(e)?;
        }
        let g = self.green(v)?;
        Ok(edges.iter().filter(|e| self.is_free(e.tail)).map(|e| g.get(e.tail)).sum::<f64>() / 6.0)
    }
}

/// Green's function of the domain with the `killed` vertices absorbing.
pub fn green(
    domain: &Arc<LatticeDomain>,
    killed: &HashSet<LatticeVertex>,
    v: LatticeVertex,
) -> Result<GreenFunction, HarmonicError> {
    LaplaceSolver::new(domain, killed)?.green(v)
}

/// `H(v, E)`: probability that simple random walk from `v` first leaves the
/// domain (boundary or killed set) through an edge in `edges`.
pub fn harmonic_measure_edges(
    domain: &Arc<LatticeDomain>,
    killed: &HashSet<LatticeVertex>,
    v: LatticeVertex,
    edges: &[DirectedEdge],
) -> Result<f64, HarmonicError> {
    LaplaceSolver::new(domain, killed)?.harmonic_measure_edges(v, edges)
}

/// All exit edges `(u, w)` with `u` free and `w` absorbing.
pub fn exit_edges(domain: &LatticeDomain, killed: &HashSet<LatticeVertex>) -> Vec<DirectedEdge> {
    let mut absorbing: Vec<bool> = (0..domain.n_vertices()).map(|i| !domain.is_interior_index(i)).collect();
    for k in killed {
        if let Some(i) = domain.index_of(*k) {
            absorbing[i] = true;
        }
    }
    let mut out = Vec::new();
    for i in 0..domain.n_interior() {
        if absorbing[i] {
            continue;
        }
        for &j in domain.interior_neighbors(i) {
            if absorbing[j as usize] {
                out.push(DirectedEdge { tail: domain.vertex(i), head: domain.vertex(j as usize) });
            }
        }
    }
    out
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Monte Carlo estimate of [`harmonic_measure_edges`] from `n_walks` walks.
pub fn mc_hit_estimate(
    domain: &Arc<LatticeDomain>,
    killed: &HashSet<LatticeVertex>,
    v: LatticeVertex,
    edges: &[DirectedEdge],
    n_walks: usize,
    seed: u64,
) -> Result<Estimate, HarmonicError> {
    if n_walks == 0 {
        return Err(HarmonicError::InvalidConfig("n_walks must be at least 1".into()));
    }
    let start = domain.index_of(v).ok_or(HarmonicError::UnknownVertex(v))?;
    let mut absorbing: Vec<bool> = (0..domain.n_vertices()).map(|i| !domain.is_interior_index(i)).collect();
    for k in killed {
        let i = domain.index_of(*k).ok_or(HarmonicError::UnknownVertex(*k))?;
        absorbing[i] = true;
    }
    if absorbing[start] {
        return Err(HarmonicError::NotFree(v));
    }
    let targets: HashSet<(usize, usize)> = edges
        .iter()
        .filter_map(|e| Some((domain.index_of(e.tail)?, domain.index_of(e.head)?)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..n_walks {
        let mut cur = start;
        loop {
            let next = domain.interior_neighbors(cur)[rng.random_range(0..6)] as usize;
            if absorbing[next] {
                if targets.contains(&(cur, next)) {
                    hits += 1;
                }
                break;
            }
            cur = next;
        }
    }
    let n = n_walks as f64;
    let mean = hits as f64 / n;
    let std_error = if n_walks > 1 { (mean * (1.0 - mean) / (n - 1.0)).sqrt() } else { 0.0 };
    Ok(Estimate { mean, std_error, samples: n_walks })
}
