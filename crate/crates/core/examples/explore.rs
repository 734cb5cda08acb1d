//! One harmonic explorer run and one percolation interface on the same box,
//! with the first few steps of the harmonic explorer's log.
//!
//! cargo run --release --example explore [seed]

use std::sync::Arc;

use harmonic_explorer::explorer::{run, run_percolation};
use harmonic_explorer::harmonic::SolverConfig;
use harmonic_explorer::lattice::LatticeDomain;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(7);
    let d = Arc::new(LatticeDomain::build_box(40, 20, LatticeDomain::centered_split(40))?);

    let he = run(&d, seed, SolverConfig::default())?;
    println!("harmonic explorer: {} steps, {} path points", he.n(), he.path().len());
    println!("  n  vertex        p        coin   colour");
    for r in he.step_log().iter().take(8) {
        println!("{:3}  {:12}  {:.5}  {:.4}  {}", r.n, format!("{:?}", (r.v_next.a, r.v_next.b)), r.p, r.x, u8::from(r.chose_double_prime));
    }

    let perc = run_percolation(&d, seed)?;
    println!("percolation: {} steps", perc.n());

    let end = he.path().last().copied().unwrap_or_default();
    println!("both runs end at {:.3}", end);
    Ok(())
}
