//! Loewner driving functions of lattice curves: a harmonic explorer path
//! seen from its start, and the zigzag curves whose driving function
//! flattens as they shrink.
//!
//! cargo run --release --example driving

use std::sync::Arc;

use harmonic_explorer::explorer::run;
use harmonic_explorer::harmonic::SolverConfig;
use harmonic_explorer::lattice::LatticeDomain;
use harmonic_explorer::loewner::{extract_driving, zigzag_fixture, HCurve};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = Arc::new(LatticeDomain::build_box(60, 30, LatticeDomain::centered_split(60))?);
    let state = run(&d, 3, SolverConfig::default())?;
    let origin = d.v_start().position();
    // Stop at the first tenth of the path; the extractor needs a curve in
    // the upper half-plane starting at 0.
    let head: Vec<_> = state.path().iter().take(state.path().len() / 10).map(|&z| z - origin).collect();
    let w = extract_driving(&HCurve::new(head)?, 1e-2)?;
    println!("explorer prefix: capacity {:.3} over {} slits, W(end) = {:.3}", w.horizon(), w.len() - 1, w.value_at(w.horizon()));

    for eps in [0.2, 0.1, 0.05, 0.025] {
        let z = extract_driving(&zigzag_fixture(eps, (1.0 / eps) as usize), 1e-4)?;
        let sup = z.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        println!("zigzag eps {eps:<6} sup |W| = {sup:.5}");
    }
    Ok(())
}
