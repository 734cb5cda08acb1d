//! The harmonic explorer and the percolation exploration interface.
//!
//! The explorer walks through the triangles of a domain from the start
//! midpoint to the end midpoint. Entering a triangle through edge `AB`, it
//! meets the third vertex `v`. If `v` is undetermined it is coloured 1 with
//! probability `p`, the current harmonic extension of all determined colours
//! at `v`; a vertex coloured 1 stays to the right of the path and a vertex
//! coloured 0 to the left. The walk leaves through `vA` (when `v` is 1) or
//! through `Bv` (when `v` is 0). Replacing `p` by `1/2` gives the
//! percolation exploration.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::harmonic::{
    harmonic_extension, refix_index, FixedValues, HarmonicError, HarmonicField, IncrementalExtension, SolverConfig,
};
use crate::lattice::{EdgeMidpoint, LatticeDomain, LatticeError, LatticeVertex, Triangle};
use crate::rng::{sample_stream, unit_coin};

#[derive(Debug, Error)]
pub enum ExplorerError {
    #[error("the exploration has already reached the end edge")]
    Terminated,
    #[error("coin value {0} is outside [0, 1]")]
    InvalidCoin(f64),
    #[error("no termination after {0} steps")]
    NonTermination(usize),
    #[error("the path left the domain at {0}")]
    LeftDomain(LatticeVertex),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
}

/// Supplies the colouring probability of undetermined vertices.
pub trait CoinBias {
    /// Probability that the undetermined vertex with index `i` gets colour 1.
    fn probability(&mut self, i: usize) -> Result<f64, ExplorerError>;
    /// Records that vertex `i` has been determined.
    fn fix(&mut self, i: usize, colour: u8) -> Result<(), ExplorerError>;
}

/// Keeps the full harmonic field, re-solved after every newly determined
/// vertex (warm started when the solver is iterative).
#[derive(Clone, Debug)]
pub struct FieldBias {
    field: HarmonicField,
    cfg: SolverConfig,
}

impl FieldBias {
    pub fn new(domain: &Arc<LatticeDomain>, cfg: SolverConfig) -> Result<Self, ExplorerError> {
        let field = harmonic_extension(domain, &FixedValues::h0(domain), &cfg)?;
        Ok(Self { field, cfg })
    }

    pub fn field(&self) -> &HarmonicField {
        &self.field
    }
}

impl CoinBias for FieldBias {
    fn probability(&mut self, i: usize) -> Result<f64, ExplorerError> {
        Ok(self.field.value_at(i))
    }

    fn fix(&mut self, i: usize, colour: u8) -> Result<(), ExplorerError> {
        self.field = refix_index(&self.field, i, f64::from(colour), &self.cfg)?;
        Ok(())
    }
}

impl CoinBias for IncrementalExtension {
    fn probability(&mut self, i: usize) -> Result<f64, ExplorerError> {
        Ok(self.value(i))
    }

    fn fix(&mut self, i: usize, colour: u8) -> Result<(), ExplorerError> {
        IncrementalExtension::fix(self, i, f64::from(colour));
        Ok(())
    }
}

/// Colours every undetermined vertex by a fair coin.
#[derive(Clone, Copy, Debug, Default)]
pub struct FairCoin;

impl CoinBias for FairCoin {
    fn probability(&mut self, _: usize) -> Result<f64, ExplorerError> {
        Ok(0.5)
    }

    fn fix(&mut self, _: usize, _: u8) -> Result<(), ExplorerError> {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    /// Index of the step, starting at 1.
    pub n: usize,
    pub v_next: LatticeVertex,
    pub p: f64,
    /// The coin; `NaN` for steps forced by [`ExplorerState::branch`].
    pub x: f64,
    pub already_fixed: bool,
    /// Whether `v_next` is coloured 1, so the path leaves through `v_next A`.
    pub chose_double_prime: bool,
}

#[derive(Clone, Debug)]
pub struct ExplorerState<B = FieldBias> {
    domain: Arc<LatticeDomain>,
    bias: B,
    colours: Vec<Option<u8>>,
    newly_fixed: Vec<usize>,
    n: usize,
    current: EdgeMidpoint,
    previous: Option<EdgeMidpoint>,
    triangle: Option<Triangle>,
    path: Vec<Complex64>,
    terminated: bool,
    log: Vec<StepRecord>,
}

/// What the next step looks like before the coin is consulted.
struct Lookahead {
    triangle: Triangle,
    a: LatticeVertex,
    b: LatticeVertex,
    v: LatticeVertex,
    index: usize,
    p: f64,
    already: Option<u8>,
}

impl ExplorerState<FieldBias> {
    /// The explorer at time 0 with the exact harmonic field.
    pub fn init(domain: &Arc<LatticeDomain>, cfg: SolverConfig) -> Result<Self, ExplorerError> {
        Ok(Self::with_bias(domain, FieldBias::new(domain, cfg)?))
    }

    /// The current harmonic extension `h_n`.
    pub fn field(&self) -> &HarmonicField {
        self.bias.field()
    }
}

impl<B: CoinBias> ExplorerState<B> {
    pub fn with_bias(domain: &Arc<LatticeDomain>, bias: B) -> Self {
        let colours = (0..domain.n_vertices()).map(|i| domain.h0_at(i)).collect();
        let start = domain.v_start();
        Self {
            domain: Arc::clone(domain),
            bias,
            colours,
            newly_fixed: Vec::new(),
            n: 0,
            current: start,
            previous: None,
            triangle: None,
            path: vec![start.position()],
            terminated: false,
            log: Vec::new(),
        }
    }

    pub fn domain(&self) -> &Arc<LatticeDomain> {
        &self.domain
    }

    pub fn bias(&self) -> &B {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut B {
        &mut self.bias
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn current_mid(&self) -> EdgeMidpoint {
        self.current
    }

    pub fn previous_mid(&self) -> Option<EdgeMidpoint> {
        self.previous
    }

    pub fn current_triangle(&self) -> Option<Triangle> {
        self.triangle
    }

    /// Embedded polyline: start midpoint, then alternately triangle centroids
    /// and crossed midpoints.
    pub fn path(&self) -> &[Complex64] {
        &self.path
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    pub fn step_log(&self) -> &[StepRecord] {
        &self.log
    }

    /// Determined colour of a vertex index (boundary or explored).
    pub fn colour(&self, i: usize) -> Option<u8> {
        self.colours[i]
    }

    /// Interior vertex indices determined by the exploration, in order.
    pub fn newly_fixed(&self) -> &[usize] {
        &self.newly_fixed
    }

    fn look(&mut self) -> Result<Lookahead, ExplorerError> {
        if self.terminated {
            return Err(ExplorerError::Terminated);
        }
        let triangle = self.domain.triangle_across(self.current, self.triangle)?;
        let v = triangle.opposite(self.current).expect("triangle borders the current edge");
        let [t0, t1, t2] = triangle.vertices();
        // Rotate the counterclockwise vertex list so that it reads (A, B, v).
        let (a, b) = if t2 == v {
            (t0, t1)
        } else if t0 == v {
            (t1, t2)
        } else {
            (t2, t0)
        };
        let index = self.domain.index_of(v).ok_or(ExplorerError::LeftDomain(v))?;
        let already = self.colours[index];
        let p = match already {
            Some(c) => f64::from(c),
            None => self.bias.probability(index)?.clamp(0.0, 1.0),
        };
        Ok(Lookahead { triangle, a, b, v, index, p, already })
    }

    fn advance(&mut self, la: Lookahead, black: bool, x: f64) -> Result<(), ExplorerError> {
        let colour = u8::from(black);
        if la.already.is_none() {
            self.bias.fix(la.index, colour)?;
            self.colours[la.index] = Some(colour);
            self.newly_fixed.push(la.index);
        }
        let next = if black { EdgeMidpoint::new(la.v, la.a)? } else { EdgeMidpoint::new(la.b, la.v)? };
        self.n += 1;
        self.path.push(la.triangle.centroid());
        self.path.push(next.position());
        self.previous = Some(self.current);
        self.current = next;
        self.triangle = Some(la.triangle);
        self.terminated = next == self.domain.v_end();
        self.log.push(StepRecord {
            n: self.n,
            v_next: la.v,
            p: la.p,
            x,
            already_fixed: la.already.is_some(),
            chose_double_prime: black,
        });
        Ok(())
    }

    /// One step with coin `x`: the new vertex gets colour 1 iff `x <= p`.
    /// A vertex that is already determined keeps its colour.
    pub fn step(&mut self, x: f64) -> Result<(), ExplorerError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(ExplorerError::InvalidCoin(x));
        }
        let la = self.look()?;
        let black = match la.already {
            Some(c) => c == 1,
            None => x <= la.p,
        };
        self.advance(la, black, x)
    }

    /// Steps with coins from `rng` until the end edge is reached.
    pub fn run_with<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(), ExplorerError> {
        let bound = self.domain.triangle_count();
        while !self.terminated {
            if self.n >= bound {
                return Err(ExplorerError::NonTermination(self.n));
            }
            self.step(unit_coin(rng))?;
        }
        Ok(())
    }
}

impl<B: CoinBias + Clone> ExplorerState<B> {
    /// The probability `p` of the next vertex and the two one-step children:
    /// the first with the vertex coloured 1, the second with it coloured 0.
    /// When the vertex is already determined both children are the unique
    /// successor.
    pub fn branch(&self) -> Result<(f64, Self, Self), ExplorerError> {
        let mut probe = self.clone();
        let la = probe.look()?;
        let p = la.p;
        let forced = la.already;
        let mut black = self.clone();
        let mut white = self.clone();
        let la_b = black.look()?;
        black.advance(la_b, forced.map_or(true, |c| c == 1), f64::NAN)?;
        let la_w = white.look()?;
        white.advance(la_w, forced.map_or(false, |c| c == 1), f64::NAN)?;
        Ok((p, black, white))
    }
}

/// A full harmonic explorer run with coins from the stream of `seed`.
pub fn run(domain: &Arc<LatticeDomain>, seed: u64, cfg: SolverConfig) -> Result<ExplorerState, ExplorerError> {
    run_indexed(domain, seed, 0, cfg)
}

/// A full run using the counter-based stream `(master_seed, sample_index)`.
pub fn run_indexed(
    domain: &Arc<LatticeDomain>,
    master_seed: u64,
    sample_index: u64,
    cfg: SolverConfig,
) -> Result<ExplorerState, ExplorerError> {
    let mut state = ExplorerState::init(domain, cfg)?;
    state.run_with(&mut sample_stream(master_seed, sample_index))?;
    Ok(state)
}

/// The percolation exploration interface with coins from the stream of `seed`.
pub fn run_percolation(domain: &Arc<LatticeDomain>, seed: u64) -> Result<ExplorerState<FairCoin>, ExplorerError> {
    let mut state = ExplorerState::with_bias(domain, FairCoin);
    state.run_with(&mut sample_stream(seed, 0))?;
    Ok(state)
}

/// Writes the path polyline as CSV with header `step,x,y`.
pub fn write_path_csv<W: Write>(path: &[Complex64], mut out: W) -> std::io::Result<()> {
    writeln!(out, "step,x,y")?;
    for (k, z) in path.iter().enumerate() {
        writeln!(out, "{},{},{}", k, z.re, z.im)?;
    }
    Ok(())
}

/// Writes the step log as CSV with header `n,va,vb,p,x,fixed,turn`. `turn` is
/// `L` when the path leaves through the edge on its left (new vertex coloured
/// 1) and `R` otherwise.
pub fn write_step_log_csv<W: Write>(log: &[StepRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,va,vb,p,x,fixed,turn")?;
    for r in log {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            r.v_next.a,
            r.v_next.b,
            r.p,
            r.x,
            u8::from(r.already_fixed),
            if r.chose_double_prime { 'L' } else { 'R' }
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym_box() -> Arc<LatticeDomain> {
        Arc::new(LatticeDomain::build_box(12, 6, LatticeDomain::centered_split(12)).unwrap())
    }

    #[test]
    fn first_step_is_fair_in_symmetric_box() {
        let d = sym_box();
        let s = ExplorerState::init(&d, SolverConfig::direct()).unwrap();
        let (p, _, _) = s.branch().unwrap();
        assert!((p - 0.5).abs() < 1e-10);
    }

    #[test]
    fn first_steps_mirror_each_other() {
        let d = sym_box();
        let mut lo = ExplorerState::init(&d, SolverConfig::direct()).unwrap();
        let mut hi = lo.clone();
        lo.step(0.5 - 1e-6).unwrap();
        hi.step(0.5 + 1e-6).unwrap();
        let axis = d.v_start().position().re;
        let a = lo.path()[2];
        let b = hi.path()[2];
        assert!((a.re - axis + (b.re - axis)).abs() < 1e-12);
        assert!((a.im - b.im).abs() < 1e-12);
    }

    #[test]
    fn determined_vertices_force_the_turn() {
        let d = sym_box();
        let mut s = ExplorerState::init(&d, SolverConfig::direct()).unwrap();
        let mut rng = sample_stream(5, 0);
        s.run_with(&mut rng).unwrap();
        for r in s.step_log().iter().filter(|r| r.already_fixed) {
            assert!(r.p == 0.0 || r.p == 1.0);
            assert_eq!(r.chose_double_prime, r.p == 1.0);
        }
    }

    #[test]
    fn step_after_termination_fails() {
        let d = sym_box();
        let mut s = run(&d, 1, SolverConfig::default()).unwrap();
        assert!(matches!(s.step(0.3), Err(ExplorerError::Terminated)));
        assert!(matches!(ExplorerState::init(&d, SolverConfig::default()).unwrap().step(1.5), Err(ExplorerError::InvalidCoin(_))));
    }

    #[test]
    fn csv_headers() {
        let d = sym_box();
        let s = run_percolation(&d, 4).unwrap();
        let mut p = Vec::new();
        write_path_csv(s.path(), &mut p).unwrap();
        assert!(p.starts_with(b"step,x,y\n"));
        let mut l = Vec::new();
        write_step_log_csv(s.step_log(), &mut l).unwrap();
        assert!(l.starts_with(b"n,va,vb,p,x,fixed,turn\n"));
        assert_eq!(String::from_utf8(l).unwrap().lines().count(), s.n() + 1);
    }
}
