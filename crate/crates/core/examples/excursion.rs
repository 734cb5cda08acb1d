//! Excursion measures on a box: total masses between boundary arcs, the
//! visit identity and the mass of excursions reaching a ball.
//!
//! cargo run --release --example excursion

use std::collections::HashSet;
use std::sync::Arc;

use harmonic_explorer::excursion::{ball_hit_mass, edge_sets, summarize, total_mass, ExcursionSpec};
use harmonic_explorer::lattice::LatticeDomain;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = Arc::new(LatticeDomain::build_box(24, 12, 11)?);
    let sets = edge_sets(&d, &HashSet::new());
    let bottom: Vec<_> = sets.e_out.iter().copied().filter(|e| e.tail.b == 0).collect();
    let top: Vec<_> = sets.e_in.iter().copied().filter(|e| e.head.b == 12).collect();

    let spec = ExcursionSpec { domain: Arc::clone(&d), killed: HashSet::new(), e1: bottom.clone(), e2: top };
    println!("bottom to top: {:.6}", total_mass(&spec)?);
    println!("top to bottom: {:.6}", total_mass(&spec.reversed())?);

    let full = ExcursionSpec { domain: Arc::clone(&d), killed: HashSet::new(), e1: sets.e_out, e2: sets.e_in };
    let s = summarize(&full)?;
    let worst = s.visit_integrals.iter().map(|(_, x)| (x - 1.0).abs()).fold(0.0, f64::max);
    println!("all excursions: mass {:.3}, every vertex visited once on average (max error {worst:.1e})", s.total_mass);

    let centre = d.interior()[d.n_interior() / 2];
    let hit = ball_hit_mass(&ExcursionSpec::from_edges(&d, HashSet::new(), bottom), centre)?;
    println!(
        "ball of radius {:.2} around {:?}: mass {:.5}, harmonic measure {:.5}, ratio {:.3}",
        hit.radius,
        (centre.a, centre.b),
        hit.mass,
        hit.harmonic_measure,
        hit.ratio()
    );
    Ok(())
}
