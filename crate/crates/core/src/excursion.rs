//! Discrete excursion measures and related exact identities.
//!
//! For a domain `D` with an optional set of killed interior vertices, the
//! "boundary" `V_∂` is the boundary cycle together with the killed vertices.
//! An excursion starts at `b ∈ V_∂`, steps along an edge of `E₁`, then moves
//! as simple random walk until it first returns to `V_∂`; its weight is
//! `6^{−length}`. `ν(D, E₁, E₂)` keeps the excursions whose last edge lies in
//! `E₂`. Everything here is computed with linear solves; nothing is sampled.

use std::collections::HashSet;
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::explorer::{CoinBias, ExplorerError, ExplorerState};
use crate::harmonic::{HarmonicError, LaplaceSolver};
use crate::lattice::{DirectedEdge, EdgeKind, LatticeDomain, LatticeVertex};

#[derive(Debug, Error)]
pub enum ExcursionError {
    #[error("edge {tail} -> {head} is not in the required edge set")]
    InvalidEdge { tail: LatticeVertex, head: LatticeVertex },
    #[error("vertex {0} is not a free vertex of the domain")]
    NotFree(LatticeVertex),
    #[error("ball around {center} is degenerate (inradius {inradius})")]
    DegenerateBall { center: LatticeVertex, inradius: f64 },
    #[error("function has {got} values, the domain has {expected} vertices")]
    WrongLength { got: usize, expected: usize },
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error(transparent)]
    Explorer(#[from] ExplorerError),
}

/// Outgoing and incoming boundary edges of `D` minus a killed set.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSets {
    pub e_out: Vec<DirectedEdge>,
    pub e_in: Vec<DirectedEdge>,
}

fn absorbing_mask(domain: &LatticeDomain, killed: &HashSet<LatticeVertex>) -> Vec<bool> {
    let mut mask: Vec<bool> = (0..domain.n_vertices()).map(|i| !domain.is_interior_index(i)).collect();
    for v in killed {
        if let Some(i) = domain.index_of(*v) {
            mask[i] = true;
        }
    }
    mask
}

/// All directed edges `(b, u)` with `b` on the boundary or killed and the
/// open edge inside `D`, and their reversals. Edges between two boundary
/// vertices that cut through the domain are included.
pub fn edge_sets(domain: &LatticeDomain, killed: &HashSet<LatticeVertex>) -> EdgeSets {
    let mask = absorbing_mask(domain, killed);
    let mut e_out = Vec::new();
    for i in 0..domain.n_vertices() {
        if !mask[i] {
            continue;
        }
        let b = domain.vertex(i);
        for u in b.neighbors() {
            if domain.index_of(u).is_some() && domain.edge_kind(b, u) == EdgeKind::Inside {
                e_out.push(DirectedEdge { tail: b, head: u });
            }
        }
    }
    let e_in = e_out.iter().map(|e| e.rev()).collect();
    EdgeSets { e_out, e_in }
}

/// The data of one excursion measure.
#[derive(Clone, Debug)]
pub struct ExcursionSpec {
    pub domain: Arc<LatticeDomain>,
    pub killed: HashSet<LatticeVertex>,
    pub e1: Vec<DirectedEdge>,
    pub e2: Vec<DirectedEdge>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExcursionSummary {
    pub total_mass: f64,
    /// `∫ n_v dν` for every free vertex `v`, in domain order.
    pub visit_integrals: Vec<(LatticeVertex, f64)>,
}

impl ExcursionSummary {
    /// Writes `quantity,value` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "quantity,value")?;
        writeln!(out, "total_mass,{}", self.total_mass)?;
        for (v, x) in &self.visit_integrals {
            writeln!(out, "visit_{}_{},{}", v.a, v.b, x)?;
        }
        Ok(())
    }
}

struct Prepared {
    solver: LaplaceSolver,
    idx1: Vec<(usize, usize)>,
    set2: HashSet<(usize, usize)>,
}

impl ExcursionSpec {
    /// The measure on all excursions from `e1` (every exit allowed).
    pub fn from_edges(domain: &Arc<LatticeDomain>, killed: HashSet<LatticeVertex>, e1: Vec<DirectedEdge>) -> Self {
        let e2 = edge_sets(domain, &killed).e_in;
        Self { domain: Arc::clone(domain), killed, e1, e2 }
    }

    /// The spec with `E₁' = rev(E₂)` and `E₂' = rev(E₁)`.
    pub fn reversed(&self) -> Self {
        Self {
            domain: Arc::clone(&self.domain),
            killed: self.killed.clone(),
            e1: self.e2.iter().map(|e| e.rev()).collect(),
            e2: self.e1.iter().map(|e| e.rev()).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), ExcursionError> {
        let sets = edge_sets(&self.domain, &self.killed);
        let out: HashSet<&DirectedEdge> = sets.e_out.iter().collect();
        for e in &self.e1 {
            if !out.contains(e) {
                return Err(ExcursionError::InvalidEdge { tail: e.tail, head: e.head });
            }
        }
        for e in &self.e2 {
            if !out.contains(&e.rev()) {
                return Err(ExcursionError::InvalidEdge { tail: e.tail, head: e.head });
            }
        }
        Ok(())
    }

    fn prepare(&self) -> Result<Prepared, ExcursionError> {
        self.validate()?;
        let mask = absorbing_mask(&self.domain, &self.killed);
        let solver = LaplaceSolver::from_mask(&self.domain, mask);
        let idx = |e: &DirectedEdge| {
            (
                self.domain.index_of(e.tail).expect("validated edge"),
                self.domain.index_of(e.head).expect("validated edge"),
            )
        };
        Ok(Prepared { solver, idx1: self.e1.iter().map(idx).collect(), set2: self.e2.iter().map(idx).collect() })
    }
}

impl Prepared {
    /// Probability, from each free vertex, that the walk's exit step is in `E₂`.
    fn exit_probability(&self, domain: &LatticeDomain) -> Vec<f64> {
        let mut source = vec![0.0; domain.n_vertices()];
        for &(x, _) in &self.set2 {
            if !self.solver.is_absorbing_index(x) {
                source[x] += 1.0;
            }
        }
        self.solver.solve_source(&source)
    }

    fn total_mass(&self, q: &[f64]) -> f64 {
        self.idx1
            .iter()
            .map(|&(b, u)| {
                if self.solver.is_absorbing_index(u) {
                    if self.set2.contains(&(b, u)) {
                        1.0 / 6.0
                    } else {
                        0.0
                    }
                } else {
                    q[u] / 6.0
                }
            })
            .sum()
    }

    /// `Σ_{(b,u)∈E₁, u free} G(u, ·)/6`, the expected visits under `ν(D, E₁)`.
    fn entrance_visits(&self, domain: &LatticeDomain) -> Vec<f64> {
        let mut source = vec![0.0; domain.n_vertices()];
        for &(_, u) in &self.idx1 {
            if !self.solver.is_absorbing_index(u) {
                source[u] += 1.0;
            }
        }
        self.solver.solve_source(&source)
    }
}

/// `‖ν(D, E₁, E₂)‖`.
pub fn total_mass(s: &ExcursionSpec) -> Result<f64, ExcursionError> {
    let p = s.prepare()?;
    let q = p.exit_probability(&s.domain);
    Ok(p.total_mass(&q))
}

/// `∫ n_v dν(D, E₁)`: expected visits to `v` by excursions from `E₁`, all
/// exits allowed (the `e2` field is ignored).
pub fn visit_integral(s: &ExcursionSpec, v: LatticeVertex) -> Result<f64, ExcursionError> {
    visit_integrals(s)?
        .into_iter()
        .find(|(u, _)| *u == v)
        .map(|(_, x)| x)
        .ok_or(ExcursionError::NotFree(v))
}

/// [`visit_integral`] at every free vertex, in domain order, from one solve.
pub fn visit_integrals(s: &ExcursionSpec) -> Result<Vec<(LatticeVertex, f64)>, ExcursionError> {
    let p = s.prepare()?;
    let visits = p.entrance_visits(&s.domain);
    Ok((0..s.domain.n_vertices())
        .filter(|&i| !p.solver.is_absorbing_index(i))
        .map(|i| (s.domain.vertex(i), visits[i]))
        .collect())
}

/// Total mass and `∫ n_v dν(D, E₁, E₂)` at every free vertex.
pub fn summarize(s: &ExcursionSpec) -> Result<ExcursionSummary, ExcursionError> {
    let p = s.prepare()?;
    let q = p.exit_probability(&s.domain);
    let visits = p.entrance_visits(&s.domain);
    let visit_integrals = (0..s.domain.n_vertices())
        .filter(|&i| !p.solver.is_absorbing_index(i))
        .map(|i| (s.domain.vertex(i), visits[i] * q[i]))
        .collect();
    Ok(ExcursionSummary { total_mass: p.total_mass(&q), visit_integrals })
}

/// Result of [`ball_hit_mass`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallHit {
    /// Mass of the excursions from `E₁` that visit the ball.
    pub mass: f64,
    /// `H(v, rev(E₁))` for the ball's centre.
    pub harmonic_measure: f64,
    pub radius: f64,
    pub ball_size: usize,
}

impl BallHit {
    pub fn ratio(&self) -> f64 {
        self.mass / self.harmonic_measure
    }
}

/// Mass of the excursions from `E₁` (any exit) that visit the vertices of the
/// ball around `center` of radius half its inradius.
pub fn ball_hit_mass(s: &ExcursionSpec, center: LatticeVertex) -> Result<BallHit, ExcursionError> {
    s.validate()?;
    let d = &s.domain;
    let ci = d.index_of(center).ok_or(ExcursionError::NotFree(center))?;
    let mut mask = absorbing_mask(d, &s.killed);
    if mask[ci] {
        return Err(ExcursionError::NotFree(center));
    }
    let z = center.embed();
    let inradius = d
        .boundary_cycle()
        .iter()
        .chain(s.killed.iter())
        .map(|b| (b.embed() - z).norm())
        .fold(d.inradius(z), f64::min);
    if inradius < 2.0 {
        return Err(ExcursionError::DegenerateBall { center, inradius });
    }
    let radius = inradius / 2.0;
    let ball: Vec<usize> = (0..d.n_interior()).filter(|&i| !mask[i] && (d.vertex(i).embed() - z).norm() <= radius).collect();
    let harmonic_measure = {
        let solver = LaplaceSolver::from_mask(d, mask.clone());
        let rev: Vec<DirectedEdge> = s.e1.iter().map(|e| e.rev()).filter(|e| solver.is_free(e.tail)).collect();
        solver.harmonic_measure_edges(center, &rev)?
    };
    for &i in &ball {
        mask[i] = true;
    }
    let in_ball: HashSet<usize> = ball.iter().copied().collect();
    let solver = LaplaceSolver::from_mask(d, mask);
    let hit = solver.dirichlet(|i| if in_ball.contains(&i) { 1.0 } else { 0.0 });
    let mass = s
        .e1
        .iter()
        .map(|e| {
            let u = d.index_of(e.head).expect("validated edge");
            hit[u] / 6.0
        })
        .sum();
    Ok(BallHit { mass, harmonic_measure, radius, ball_size: ball.len() })
}

/// Edges `(x, b)` into determined vertices of colour 1.
fn plus_edges<B: CoinBias>(state: &ExplorerState<B>, killed: &HashSet<LatticeVertex>) -> Vec<DirectedEdge> {
    let d = state.domain();
    edge_sets(d, killed)
        .e_in
        .into_iter()
        .filter(|e| state.colour(d.index_of(e.head).expect("domain vertex")) == Some(1))
        .collect()
}

fn killed_set<B: CoinBias>(state: &ExplorerState<B>) -> HashSet<LatticeVertex> {
    state.newly_fixed().iter().map(|&i| state.domain().vertex(i)).collect()
}

/// `‖ν_n‖` for the explorer state: excursions from `E₋` in `D` minus the
/// explored vertices, ending on an edge into a vertex of colour 1.
pub fn nu_mass<B: CoinBias>(state: &ExplorerState<B>, e_minus: &[DirectedEdge]) -> Result<f64, ExcursionError> {
    let killed = killed_set(state);
    let e2 = plus_edges(state, &killed);
    let spec = ExcursionSpec { domain: Arc::clone(state.domain()), killed, e1: e_minus.to_vec(), e2 };
    total_mass(&spec)
}

/// The one-step check `‖ν_n‖ = p‖ν_{n+1}^{(1)}‖ + (1 − p)‖ν_{n+1}^{(0)}‖`,
/// returned as `(lhs, rhs)`.
pub fn nu_martingale_check<B: CoinBias + Clone>(
    state: &ExplorerState<B>,
    e_minus: &[DirectedEdge],
) -> Result<(f64, f64), ExcursionError> {
    let lhs = nu_mass(state, e_minus)?;
    let (p, black, white) = state.branch()?;
    let rhs = p * nu_mass(&black, e_minus)? + (1.0 - p) * nu_mass(&white, e_minus)?;
    Ok((lhs, rhs))
}

/// Outgoing edges from boundary vertices of colour 0, the default `E₋`.
pub fn minus_edges(domain: &LatticeDomain) -> Vec<DirectedEdge> {
    edge_sets(domain, &HashSet::new())
        .e_out
        .into_iter()
        .filter(|e| domain.h0(e.tail) == Some(0))
        .collect()
}

/// Undirected edges of the closed domain as index pairs `(i, j)`, `i < j`.
pub fn closed_edges(domain: &LatticeDomain) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..domain.n_vertices() {
        let v = domain.vertex(i);
        for u in v.neighbors() {
            if let Some(j) = domain.index_of(u) {
                if i < j && domain.edge_kind(v, u) != EdgeKind::Outside {
                    out.push((i, j));
                }
            }
        }
    }
    out
}

fn check_len(domain: &LatticeDomain, f: &[f64]) -> Result<(), ExcursionError> {
    if f.len() != domain.n_vertices() {
        return Err(ExcursionError::WrongLength { got: f.len(), expected: domain.n_vertices() });
    }
    Ok(())
}

/// `E(f) = Σ (f(v) − f(u))²` over the edges of the closed domain.
pub fn dirichlet_energy(domain: &LatticeDomain, f: &[f64]) -> Result<f64, ExcursionError> {
    check_len(domain, f)?;
    Ok(closed_edges(domain).iter().map(|&(i, j)| (f[i] - f[j]).powi(2)).sum())
}

/// `Δf(v) = Σ (f(u) − f(v))` over the edges of the closed domain at `v`.
pub fn laplacian(domain: &LatticeDomain, f: &[f64]) -> Result<Vec<f64>, ExcursionError> {
    check_len(domain, f)?;
    let mut out = vec![0.0; f.len()];
    for (i, j) in closed_edges(domain) {
        let diff = f[j] - f[i];
        out[i] += diff;
        out[j] -= diff;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn domain() -> Arc<LatticeDomain> {
        Arc::new(LatticeDomain::build_box(10, 6, 4).unwrap())
    }

    #[test]
    fn reversed_edge_sets() {
        let d = domain();
        let s = edge_sets(&d, &HashSet::new());
        assert_eq!(s.e_in, s.e_out.iter().map(|e| e.rev()).collect::<Vec<_>>());
    }

    #[test]
    fn full_measure_has_unit_visits() {
        let d = domain();
        let sets = edge_sets(&d, &HashSet::new());
        let spec = ExcursionSpec::from_edges(&d, HashSet::new(), sets.e_out.clone());
        let summary = summarize(&spec).unwrap();
        assert!((summary.total_mass - sets.e_out.len() as f64 / 6.0).abs() < 1e-10);
        for (_, x) in summary.visit_integrals {
            assert!((x - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn empty_entrance_has_no_mass() {
        let d = domain();
        let spec = ExcursionSpec::from_edges(&d, HashSet::new(), Vec::new());
        assert_eq!(total_mass(&spec).unwrap(), 0.0);
        assert_eq!(visit_integral(&spec, d.interior()[3]).unwrap(), 0.0);
    }

    #[test]
    fn all_killed_leaves_only_chords() {
        let d = domain();
        let killed: HashSet<LatticeVertex> = d.interior().iter().copied().collect();
        let s = edge_sets(&d, &killed);
        let absorbing = |v: &LatticeVertex| d.boundary_position(*v).is_some() || killed.contains(v);
        assert!(!s.e_out.is_empty());
        assert!(s.e_out.iter().all(|e| absorbing(&e.tail) && absorbing(&e.head)));
        // Every excursion has length one, so visits vanish and the mass is |E₁|/6.
        let spec = ExcursionSpec::from_edges(&d, killed, s.e_out.clone());
        assert!((total_mass(&spec).unwrap() - s.e_out.len() as f64 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_identity_and_constant() {
        let d = domain();
        let f: Vec<f64> = (0..d.n_vertices()).map(|i| ((i * 37) % 11) as f64 / 7.0).collect();
        let e = dirichlet_energy(&d, &f).unwrap();
        let lap = laplacian(&d, &f).unwrap();
        let rhs: f64 = -f.iter().zip(&lap).map(|(a, b)| a * b).sum::<f64>();
        assert!((e - rhs).abs() < 1e-10 * e.max(1.0));
        assert_eq!(dirichlet_energy(&d, &vec![3.0; d.n_vertices()]).unwrap(), 0.0);
        assert!(dirichlet_energy(&d, &[1.0]).is_err());
    }

    #[test]
    fn invalid_edges_are_rejected() {
        let d = domain();
        let v = d.interior()[0];
        let bad = DirectedEdge { tail: v, head: v.offset(0) };
        let spec = ExcursionSpec::from_edges(&d, HashSet::new(), vec![bad]);
        assert!(matches!(total_mass(&spec), Err(ExcursionError::InvalidEdge { .. })));
    }
}
