//! The exact-identity suite.
//!
//! Every check compares two independently computed numbers on a randomized
//! corpus of small domains and records the largest discrepancy. Nothing here
//! is statistical: the tolerances are rounding-level.

use std::collections::HashSet;
use std::io::Write;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::excursion::{
    self, dirichlet_energy, edge_sets, laplacian, minus_edges, nu_martingale_check, ExcursionError, ExcursionSpec,
};
use crate::explorer::{ExplorerError, ExplorerState};
use crate::harmonic::{harmonic_extension, FixedValues, HarmonicError, LaplaceSolver, SolverConfig};
use crate::lattice::{DirectedEdge, LatticeDomain, LatticeError, LatticeVertex};

pub mod oracle;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error(transparent)]
    Explorer(#[from] ExplorerError),
    #[error(transparent)]
    Excursion(#[from] ExcursionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Corpus {
    /// Twelve randomized boxes and hexagons of scale 6 to 20.
    Default,
    /// Domains with at most twelve free vertices, small enough for the oracle.
    Tiny,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub corpus: Corpus,
    pub seed: u64,
    /// Also cross-check against the dense fundamental-matrix oracle.
    pub oracle: bool,
    /// Added to every recorded discrepancy. Zero except in negative controls.
    pub perturbation: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { corpus: Corpus::Default, seed: 1, oracle: false, perturbation: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub domains: Vec<String>,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "check,cases,max_error,tolerance,passed")?;
        for c in &self.checks {
            writeln!(out, "{},{},{:e},{:e},{}", c.name, c.cases, c.max_error, c.tolerance, c.passed)?;
        }
        Ok(())
    }
}

/// Running maximum of the discrepancies of one identity.
struct Tally {
    name: &'static str,
    tolerance: f64,
    perturbation: f64,
    cases: usize,
    max_error: f64,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64, perturbation: f64) -> Self {
        Self { name, tolerance, perturbation, cases: 0, max_error: 0.0 }
    }

    fn compare(&mut self, lhs: f64, rhs: f64) {
        self.record((lhs - rhs).abs());
    }

    fn record(&mut self, err: f64) {
        let err = err + self.perturbation;
        self.cases += 1;
        // NaN must not disappear inside `max`.
        if err.is_nan() || err > self.max_error {
            self.max_error = err;
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name.to_string(),
            cases: self.cases,
            max_error: self.max_error,
            tolerance: self.tolerance,
            passed: self.cases > 0 && self.max_error <= self.tolerance,
        }
    }
}

fn describe(d: &LatticeDomain) -> String {
    format!("{} interior, {} boundary, start {:?}", d.n_interior(), d.n_boundary(), d.v_start().endpoints())
}

/// The randomized corpus for `corpus` and `seed`.
pub fn corpus_domains(corpus: Corpus, seed: u64) -> Result<Vec<Arc<LatticeDomain>>, LatticeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    match corpus {
        Corpus::Default => {
            for k in 0..12 {
                let d = if k % 3 == 2 {
                    LatticeDomain::build_hexagon(rng.random_range(3..=8))?
                } else {
                    let width = rng.random_range(6..=20);
                    let height = rng.random_range(4..=12);
                    LatticeDomain::build_box(width, height, rng.random_range(0..width - 1))?
                };
                out.push(Arc::new(d));
            }
        }
        Corpus::Tiny => {
            out.push(Arc::new(LatticeDomain::build_box(4, 2, 1)?));
            out.push(Arc::new(LatticeDomain::build_box(5, 2, 0)?));
            out.push(Arc::new(LatticeDomain::build_box(4, 4, 1)?));
            out.push(Arc::new(LatticeDomain::build_box(5, 4, 2)?));
            out.push(Arc::new(LatticeDomain::build_hexagon(2)?));
        }
    }
    Ok(out)
}

fn random_subset<T: Clone>(items: &[T], keep: f64, rng: &mut ChaCha8Rng) -> Vec<T> {
    items.iter().filter(|_| rng.random_bool(keep)).cloned().collect()
}

fn random_killed(d: &LatticeDomain, fraction: f64, rng: &mut ChaCha8Rng) -> HashSet<LatticeVertex> {
    d.interior().iter().copied().filter(|_| rng.random_bool(fraction)).collect()
}

/// Explorer states after a random number of steps, none terminated.
fn random_states(
    d: &Arc<LatticeDomain>,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<ExplorerState>, VerifyError> {
    let mut states = Vec::new();
    for _ in 0..count {
        let target = rng.random_range(0..=d.triangle_count() / 2);
        let mut s = ExplorerState::init(d, SolverConfig::direct())?;
        while s.n() < target {
            let before = s.clone();
            s.step(crate::rng::unit_coin(rng))?;
            if s.is_terminated() {
                s = before;
                break;
            }
        }
        states.push(s);
    }
    Ok(states)
}

/// Runs the suite.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    let domains = corpus_domains(cfg.corpus, cfg.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let eps = cfg.perturbation;

    let mut h_mart = Tally::new("h_martingale_one_step", 1e-8, eps);
    let mut visit_full = Tally::new("visit_integral_full_is_one", 1e-9, eps);
    let mut visit_h = Tally::new("visit_integral_equals_harmonic_measure", 1e-9, eps);
    let mut reversal = Tally::new("total_mass_reversal", 1e-9, eps);
    let mut nu_mart = Tally::new("nu_martingale_one_step", 1e-8, eps);
    let mut dirichlet = Tally::new("dirichlet_identity", 1e-10, eps);
    let mut minimizer = Tally::new("dirichlet_minimizer", 1e-12, eps);
    let mut oracle_mass = Tally::new("oracle_total_mass", 1e-10, eps);
    let mut oracle_visit = Tally::new("oracle_visit_integral", 1e-10, eps);
    let mut oracle_hm = Tally::new("oracle_harmonic_measure", 1e-10, eps);

    for d in &domains {
        // One-step martingales of h_n and of the excursion mass.
        let e_minus = minus_edges(d);
        for s in random_states(d, 2, &mut rng)? {
            let (p, black, white) = s.branch()?;
            let h = s.field().values();
            let (hb, hw) = (black.field().values(), white.field().values());
            for i in 0..d.n_vertices() {
                h_mart.compare(h[i], p * hb[i] + (1.0 - p) * hw[i]);
            }
            let (lhs, rhs) = nu_martingale_check(&s, &e_minus)?;
            nu_mart.compare(lhs, rhs);
        }

        // Visit integrals with all entrance edges.
        let killed = random_killed(d, 0.1, &mut rng);
        let sets = edge_sets(d, &killed);
        let full = ExcursionSpec::from_edges(d, killed.clone(), sets.e_out.clone());
        for (_, x) in excursion::visit_integrals(&full)? {
            visit_full.compare(x, 1.0);
        }

        // Visit integral against harmonic measure of the reversed edges.
        let solver = LaplaceSolver::new(d, &killed)?;
        let free: Vec<LatticeVertex> = (0..d.n_vertices())
            .filter(|&i| !solver.is_absorbing_index(i))
            .map(|i| d.vertex(i))
            .collect();
        for _ in 0..10 {
            let e1 = random_subset(&sets.e_out, 0.5, &mut rng);
            let spec = ExcursionSpec::from_edges(d, killed.clone(), e1.clone());
            let Some(&v) = free.choose(&mut rng) else { break };
            let rev: Vec<DirectedEdge> = e1.iter().map(|e| e.rev()).collect();
            visit_h.compare(excursion::visit_integral(&spec, v)?, solver.harmonic_measure_edges(v, &rev)?);
        }

        // Reversal symmetry of the total mass.
        for _ in 0..10 {
            let spec = ExcursionSpec {
                domain: Arc::clone(d),
                killed: killed.clone(),
                e1: random_subset(&sets.e_out, 0.4, &mut rng),
                e2: random_subset(&sets.e_in, 0.4, &mut rng),
            };
            reversal.compare(excursion::total_mass(&spec)?, excursion::total_mass(&spec.reversed())?);
        }

        // Dirichlet energy identity and the minimizing property.
        let f: Vec<f64> = (0..d.n_vertices()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let energy = dirichlet_energy(d, &f)?;
        let lap = laplacian(d, &f)?;
        let rhs = -f.iter().zip(&lap).map(|(a, b)| a * b).sum::<f64>();
        dirichlet.record((energy - rhs).abs() / energy.abs().max(1.0));

        let g = harmonic_extension(d, &FixedValues::h0(d), &SolverConfig::direct())?;
        let eg = dirichlet_energy(d, g.values())?;
        for _ in 0..20 {
            let amp = rng.random_range(1e-3..0.3);
            let ft: Vec<f64> = (0..d.n_vertices())
                .map(|i| {
                    let base = g.value_at(i);
                    if d.is_interior_index(i) { base + amp * rng.random_range(-1.0..1.0) } else { base }
                })
                .collect();
            let ef = dirichlet_energy(d, &ft)?;
            minimizer.record((eg - ef).max(0.0) / eg.max(1.0));
        }

        if cfg.oracle && cfg.corpus == Corpus::Tiny {
            oracle_checks(d, &mut rng, &mut oracle_mass, &mut oracle_visit, &mut oracle_hm)?;
        }
    }

    let mut checks: Vec<CheckResult> =
        [h_mart, visit_full, visit_h, reversal, nu_mart, dirichlet, minimizer].into_iter().map(Tally::finish).collect();
    if cfg.oracle {
        checks.extend([oracle_mass, oracle_visit, oracle_hm].into_iter().map(Tally::finish));
    }
    Ok(VerifyReport { config: cfg.clone(), domains: domains.iter().map(|d| describe(d)).collect(), checks })
}

fn oracle_checks(
    d: &Arc<LatticeDomain>,
    rng: &mut ChaCha8Rng,
    mass: &mut Tally,
    visit: &mut Tally,
    hm: &mut Tally,
) -> Result<(), VerifyError> {
    for round in 0..6 {
        let killed = if round == 0 { HashSet::new() } else { random_killed(d, 0.25, rng) };
        if d.n_interior() - killed.len() > 12 {
            continue;
        }
        let chain = oracle::AbsorbingChain::new(d, &killed);
        let sets = edge_sets(d, &killed);
        let spec = ExcursionSpec {
            domain: Arc::clone(d),
            killed: killed.clone(),
            e1: random_subset(&sets.e_out, 0.6, rng),
            e2: random_subset(&sets.e_in, 0.6, rng),
        };
        mass.compare(excursion::total_mass(&spec)?, chain.total_mass(&spec.e1, &spec.e2));
        let all_exits = ExcursionSpec::from_edges(d, killed.clone(), spec.e1.clone());
        let solver = LaplaceSolver::new(d, &killed)?;
        for (v, x) in excursion::visit_integrals(&all_exits)? {
            visit.compare(x, chain.visit_integral(&spec.e1, v));
            hm.compare(solver.harmonic_measure_edges(v, &spec.e2)?, chain.harmonic_measure(v, &spec.e2));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_sizes() {
        let d = corpus_domains(Corpus::Default, 3).unwrap();
        assert!(d.len() >= 10);
        for d in corpus_domains(Corpus::Tiny, 3).unwrap() {
            assert!(d.n_interior() <= 12, "{}", d.n_interior());
        }
    }

    #[test]
    fn tiny_suite_passes_and_perturbation_fails() {
        let cfg = VerifyConfig { corpus: Corpus::Tiny, seed: 5, oracle: true, perturbation: 0.0 };
        let report = run_verify(&cfg).unwrap();
        assert!(report.all_passed(), "{:#?}", report.checks);
        assert_eq!(report.checks.len(), 10);
        let bad = run_verify(&VerifyConfig { perturbation: 1e-6, ..cfg }).unwrap();
        assert!(bad.checks.iter().all(|c| !c.passed));
    }
}
