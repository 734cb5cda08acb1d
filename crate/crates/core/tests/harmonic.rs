use std::collections::HashSet;
use std::sync::Arc;

use harmonic_explorer::harmonic::{
    exit_edges, green, harmonic_extension, harmonic_measure_edges, mc_hit_estimate, FixedValues, HarmonicField,
    SolverConfig, SolverMethod,
};
use harmonic_explorer::lattice::{LatticeDomain, LatticeVertex};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn domain(kind: u8, size: usize, split: usize) -> Arc<LatticeDomain> {
    Arc::new(match kind % 2 {
        0 => LatticeDomain::build_box(size + 4, size / 2 + 2, split % (size + 3)).unwrap(),
        _ => LatticeDomain::build_hexagon(size / 2 + 2).unwrap(),
    })
}

/// Random boundary data plus a few random interior vertices fixed as well.
fn random_fixed(d: &LatticeDomain, seed: u64) -> FixedValues {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = FixedValues::empty(d);
    for &v in d.boundary_cycle() {
        f.set(d, v, rng.random_range(-1.0..2.0)).unwrap();
    }
    for &v in d.interior() {
        if rng.random_bool(0.1) {
            f.set(d, v, rng.random_range(-1.0..2.0)).unwrap();
        }
    }
    f
}

fn neighbour_mean(field: &HarmonicField, v: LatticeVertex) -> f64 {
    v.neighbors().iter().map(|u| field.value(*u).unwrap()).sum::<f64>() / 6.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mean_value_and_maximum_principle(kind in 0u8..2, size in 0usize..12, split in 0usize..20, seed in any::<u64>()) {
        let d = domain(kind, size, split);
        let fixed = random_fixed(&d, seed);
        let field = harmonic_extension(&d, &fixed, &SolverConfig::direct()).unwrap();
        let given: Vec<f64> = (0..d.n_vertices()).filter_map(|i| fixed.get_index(i)).collect();
        let lo = given.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = given.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (i, &v) in d.interior().iter().enumerate() {
            let h = field.value(v).unwrap();
            prop_assert!(h >= lo - 1e-12 && h <= hi + 1e-12);
            if !fixed.is_fixed_index(i) {
                prop_assert!((h - neighbour_mean(&field, v)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn extension_is_linear(kind in 0u8..2, size in 0usize..10, seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let d = domain(kind, size, 1);
        let f = random_fixed(&d, seed);
        // Same fixed set with independent values.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5555);
        let mut g = FixedValues::empty(&d);
        let mut combo = FixedValues::empty(&d);
        for i in 0..d.n_vertices() {
            if let Some(x) = f.get_index(i) {
                let y = rng.random_range(-1.0..1.0);
                g.set(&d, d.vertex(i), y).unwrap();
                combo.set(&d, d.vertex(i), alpha * x + beta * y).unwrap();
            }
        }
        let cfg = SolverConfig::direct();
        let (hf, hg, hc) = (
            harmonic_extension(&d, &f, &cfg).unwrap(),
            harmonic_extension(&d, &g, &cfg).unwrap(),
            harmonic_extension(&d, &combo, &cfg).unwrap(),
        );
        for i in 0..d.n_vertices() {
            let lin = alpha * hf.value_at(i) + beta * hg.value_at(i);
            prop_assert!((hc.value_at(i) - lin).abs() <= 10.0 * cfg.tolerance);
        }
    }

    #[test]
    fn green_function_is_symmetric(kind in 0u8..2, size in 0usize..10, seed in any::<u64>()) {
        let d = domain(kind, size, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let killed: HashSet<LatticeVertex> = d.interior().iter().copied().filter(|_| rng.random_bool(0.15)).collect();
        let free: Vec<LatticeVertex> = d.interior().iter().copied().filter(|v| !killed.contains(v)).collect();
        prop_assume!(free.len() >= 2);
        let u = free[rng.random_range(0..free.len())];
        let v = free[rng.random_range(0..free.len())];
        let gu = green(&d, &killed, u).unwrap();
        let gv = green(&d, &killed, v).unwrap();
        prop_assert!((gu.get(v) - gv.get(u)).abs() <= 1e-9);
        prop_assert!(gu.get(u) >= 1.0);
    }

    #[test]
    fn exit_measure_sums_to_one(kind in 0u8..2, size in 0usize..10, seed in any::<u64>()) {
        let d = domain(kind, size, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let killed: HashSet<LatticeVertex> = d.interior().iter().copied().filter(|_| rng.random_bool(0.2)).collect();
        let free: Vec<LatticeVertex> = d.interior().iter().copied().filter(|v| !killed.contains(v)).collect();
        prop_assume!(!free.is_empty());
        let v = free[rng.random_range(0..free.len())];
        let all = exit_edges(&d, &killed);
        let h = harmonic_measure_edges(&d, &killed, v, &all).unwrap();
        prop_assert!((h - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn solver_methods_agree_on_a_large_box() {
    // 120 x 80 has 9 401 free vertices.
    let d = Arc::new(LatticeDomain::build_box(120, 80, 59).unwrap());
    let fixed = random_fixed(&d, 3);
    let eps = 1e-10;
    let direct = harmonic_extension(&d, &fixed, &SolverConfig::direct()).unwrap();
    for method in [SolverMethod::ConjugateGradient, SolverMethod::GaussSeidel { omega: 1.95 }] {
        let cfg = SolverConfig { method, tolerance: eps, max_iterations: 1_000_000, warm_start: false };
        let other = harmonic_extension(&d, &fixed, &cfg).unwrap();
        let worst = (0..d.n_vertices()).map(|i| (direct.value_at(i) - other.value_at(i)).abs()).fold(0.0, f64::max);
        assert!(worst <= 100.0 * eps, "{method:?}: {worst}");
        assert!(other.mean_value_defect() <= eps * 1.01);
    }
}

#[test]
fn monte_carlo_estimate_brackets_exact_measure() {
    let d = Arc::new(LatticeDomain::build_box(10, 6, 4).unwrap());
    let killed = HashSet::new();
    let v = d.interior()[d.n_interior() / 2];
    let top: Vec<_> = exit_edges(&d, &killed).into_iter().filter(|e| d.h0(e.head) == Some(1)).collect();
    let exact = harmonic_measure_edges(&d, &killed, v, &top).unwrap();
    let mc = mc_hit_estimate(&d, &killed, v, &top, 20_000, 9).unwrap();
    assert!((mc.mean - exact).abs() <= 4.0 * mc.std_error, "{} vs {exact}", mc.mean);
}
