use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use harmonic_explorer::explorer::{ExplorerState, FieldBias};
use harmonic_explorer::harmonic::{exit_edges, SolverConfig};
use harmonic_explorer::lattice::{EdgeMidpoint, LatticeDomain, LatticeVertex};
use harmonic_explorer::rng::{sample_stream, unit_coin};
use harmonic_explorer::verify::oracle::AbsorbingChain;
use proptest::prelude::*;

type State = ExplorerState<FieldBias>;

fn fresh(d: &Arc<LatticeDomain>) -> State {
    ExplorerState::init(d, SolverConfig::direct()).unwrap()
}

fn advance(s: &mut State, steps: usize, seed: u64) {
    let mut rng = sample_stream(seed, 0);
    for _ in 0..steps {
        if s.is_terminated() {
            break;
        }
        s.step(unit_coin(&mut rng)).unwrap();
    }
}

/// The start midpoint followed by every crossed midpoint, recovered from
/// the polyline (midpoints sit at the even positions).
fn crossed_midpoints(s: &State) -> Vec<EdgeMidpoint> {
    let d = s.domain();
    let all: Vec<LatticeVertex> = d.interior().iter().chain(d.boundary_cycle()).copied().collect();
    s.path()
        .iter()
        .step_by(2)
        .map(|&z| {
            let near: Vec<LatticeVertex> =
                all.iter().copied().filter(|v| ((v.embed() - z).norm() - 0.5).abs() < 1e-9).collect();
            let (u, v) = near
                .iter()
                .flat_map(|u| near.iter().map(move |v| (*u, *v)))
                .find(|(u, v)| u.is_adjacent(*v) && ((u.embed() + v.embed()) * 0.5 - z).norm() < 1e-9)
                .expect("path point is an edge midpoint");
            EdgeMidpoint::new(u, v).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn one_step_martingale(w in 4usize..12, h in 2usize..7, split in 0usize..20, steps in 0usize..30, seed in any::<u64>()) {
        let d = Arc::new(LatticeDomain::build_box(w, h, split % (w - 1)).unwrap());
        let mut s = fresh(&d);
        advance(&mut s, steps, seed);
        prop_assume!(!s.is_terminated());
        let (p, black, white) = s.branch().unwrap();
        for i in 0..d.n_vertices() {
            let mixed = p * black.field().value_at(i) + (1.0 - p) * white.field().value_at(i);
            prop_assert!((s.field().value_at(i) - mixed).abs() <= 1e-8);
        }
    }

    #[test]
    fn finished_paths_are_simple_interfaces(w in 4usize..14, h in 2usize..8, split in 0usize..20, seed in any::<u64>()) {
        let d = Arc::new(LatticeDomain::build_box(w, h, split % (w - 1)).unwrap());
        let mut s = fresh(&d);
        advance(&mut s, usize::MAX, seed);
        prop_assert!(s.is_terminated());
        // Terminal field is a colouring.
        for i in 0..d.n_vertices() {
            let x = s.field().value_at(i);
            prop_assert!(x.abs() <= 1e-10 || (x - 1.0).abs() <= 1e-10);
        }
        let mids = crossed_midpoints(&s);
        prop_assert_eq!(*mids.last().unwrap(), d.v_end());
        let distinct: HashSet<EdgeMidpoint> = mids.iter().copied().collect();
        prop_assert_eq!(distinct.len(), mids.len());
        // Looking along the path, 0 lies on the left and 1 on the right.
        let path = s.path();
        for (k, m) in mids.iter().enumerate().take(mids.len() - 1) {
            let dir = path[2 * k + 1] - m.position();
            let (u, v) = m.endpoints();
            let side = |x: LatticeVertex| {
                let r = x.embed() - m.position();
                dir.re * r.im - dir.im * r.re
            };
            let colour = |x: LatticeVertex| s.colour(d.index_of(x).unwrap()).unwrap();
            let (left, right) = if side(u) > 0.0 { (u, v) } else { (v, u) };
            prop_assert_eq!(colour(left), 0);
            prop_assert_eq!(colour(right), 1);
        }
    }
}

/// The step probability straight from the absorbing-chain oracle: the
/// chance that a walk from `v` first meets a determined vertex coloured 1.
fn oracle_probability(s: &State, v: LatticeVertex) -> f64 {
    let d = s.domain();
    let killed: HashSet<LatticeVertex> = s.newly_fixed().iter().map(|&i| d.vertex(i)).collect();
    let black: Vec<_> = exit_edges(d, &killed)
        .into_iter()
        .filter(|e| s.colour(d.index_of(e.head).unwrap()) == Some(1))
        .collect();
    AbsorbingChain::new(d, &killed).harmonic_measure(v, &black)
}

/// All coin outcomes to `depth` steps: the vertex colours chosen, keyed by
/// the sequence, with their probability. Every non-forced probability is
/// compared with the oracle on the way down.
fn enumerate(s: &State, depth: usize, prefix: Vec<u8>, prob: f64, out: &mut HashMap<Vec<u8>, f64>) {
    if depth == 0 || s.is_terminated() {
        *out.entry(prefix).or_default() += prob;
        return;
    }
    let (p, black, white) = s.branch().unwrap();
    let last = black.step_log().last().unwrap();
    if !last.already_fixed {
        let q = oracle_probability(s, last.v_next);
        assert!((p - q).abs() <= 1e-10, "step {}: {p} vs oracle {q}", s.n());
    }
    for (child, weight, bit) in [(&black, p, 1u8), (&white, 1.0 - p, 0u8)] {
        if weight > 0.0 {
            let mut next = prefix.clone();
            next.push(bit);
            enumerate(child, depth - 1, next, prob * weight, out);
        }
    }
}

#[test]
fn restarted_runs_follow_the_conditional_law() {
    let d = Arc::new(LatticeDomain::build_box(6, 4, 2).unwrap());
    let root = fresh(&d);
    let mut full = HashMap::new();
    enumerate(&root, 8, Vec::new(), 1.0, &mut full);
    assert!((full.values().sum::<f64>() - 1.0).abs() <= 1e-12);

    // Condition on a 4-step prefix by fixed coins.
    let mut mid = root.clone();
    for x in [0.1, 0.9, 0.1, 0.9] {
        mid.step(x).unwrap();
    }
    let prefix: Vec<u8> = mid.step_log().iter().map(|r| u8::from(r.chose_double_prime)).collect();
    let prefix_mass: f64 = full.iter().filter(|(k, _)| k.starts_with(&prefix)).map(|(_, p)| p).sum();
    assert!(prefix_mass > 0.0);

    let mut from_mid = HashMap::new();
    enumerate(&mid, 4, Vec::new(), 1.0, &mut from_mid);
    for (tail, &p) in &from_mid {
        let mut key = prefix.clone();
        key.extend(tail);
        let conditional = full.get(&key).copied().unwrap_or(0.0) / prefix_mass;
        assert!((conditional - p).abs() <= 1e-12);
    }

    // Fresh streams from the intermediate state reproduce the same law.
    let m = 4000;
    let mut counts: HashMap<Vec<u8>, usize> = HashMap::new();
    for k in 0..m {
        let mut s = mid.clone();
        let mut rng = sample_stream(77, k);
        for _ in 0..4 {
            if !s.is_terminated() {
                s.step(unit_coin(&mut rng)).unwrap();
            }
        }
        let tail: Vec<u8> = s.step_log()[4..].iter().map(|r| u8::from(r.chose_double_prime)).collect();
        *counts.entry(tail).or_default() += 1;
    }
    for (tail, &p) in &from_mid {
        let f = counts.get(tail).copied().unwrap_or(0) as f64 / m as f64;
        let sigma = (p * (1.0 - p) / m as f64).sqrt();
        assert!((f - p).abs() <= 4.0 * sigma + 1e-12, "{tail:?}: {f} vs {p}");
    }
    assert_eq!(counts.keys().filter(|k| !from_mid.contains_key(*k)).count(), 0);
}
