//! Dense absorbing-chain computations for tiny domains.
//!
//! The walk is rebuilt here straight from the lattice adjacency, and every
//! quantity comes from the fundamental matrix `N = (I − Q)⁻¹`, where `Q` is
//! the transition matrix restricted to the free vertices. `N[x][y]` is the
//! expected number of visits to `y` by a walk started at `x`.

use std::collections::{HashMap, HashSet};

use nalgebra::DMatrix;

use crate::lattice::{DirectedEdge, LatticeDomain, LatticeVertex};

pub struct AbsorbingChain {
    index: HashMap<LatticeVertex, usize>,
    n: DMatrix<f64>,
}

impl AbsorbingChain {
    /// The chain of the walk on the interior of `domain` minus `killed`.
    ///
    /// # Panics
    /// If `I − Q` is singular, which cannot happen for a domain whose free
    /// vertices all connect to its boundary.
    pub fn new(domain: &LatticeDomain, killed: &HashSet<LatticeVertex>) -> Self {
        let free: Vec<LatticeVertex> = domain.interior().iter().copied().filter(|v| !killed.contains(v)).collect();
        let index: HashMap<LatticeVertex, usize> = free.iter().enumerate().map(|(k, v)| (*v, k)).collect();
        let m = free.len();
        let mut a = DMatrix::<f64>::identity(m, m);
        for (k, v) in free.iter().enumerate() {
            for u in v.neighbors() {
                if let Some(&j) = index.get(&u) {
                    a[(k, j)] -= 1.0 / 6.0;
                }
            }
        }
        let n = a.try_inverse().expect("I - Q is invertible");
        Self { index, n }
    }

    fn exit_rate(&self, edges: &[DirectedEdge]) -> Vec<f64> {
        let mut rate = vec![0.0; self.index.len()];
        for e in edges {
            if let Some(&k) = self.index.get(&e.tail) {
                rate[k] += 1.0 / 6.0;
            }
        }
        rate
    }

    /// Probability that the walk from free `v` leaves through `edges`.
    pub fn harmonic_measure(&self, v: LatticeVertex, edges: &[DirectedEdge]) -> f64 {
        let rate = self.exit_rate(edges);
        let k = self.index[&v];
        (0..rate.len()).map(|y| self.n[(k, y)] * rate[y]).sum()
    }

    /// `‖ν(D, E₁, E₂)‖` by first-step decomposition.
    pub fn total_mass(&self, e1: &[DirectedEdge], e2: &[DirectedEdge]) -> f64 {
        let e2_set: HashSet<&DirectedEdge> = e2.iter().collect();
        e1.iter()
            .map(|e| match self.index.get(&e.head) {
                Some(_) => self.harmonic_measure(e.head, e2) / 6.0,
                None if e2_set.contains(e) => 1.0 / 6.0,
                None => 0.0,
            })
            .sum()
    }

    /// `∫ n_v dν(D, E₁)` with every exit allowed.
    pub fn visit_integral(&self, e1: &[DirectedEdge], v: LatticeVertex) -> f64 {
        let k = self.index[&v];
        e1.iter().filter_map(|e| self.index.get(&e.head)).map(|&j| self.n[(j, k)] / 6.0).sum()
    }
}
