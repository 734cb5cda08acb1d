//! Samples chordal SLE(4), checks that Var W(t)/t is close to 4 and maps
//! one trace back to its driving function.
//!
//! cargo run --release --example sle

use harmonic_explorer::loewner::{extract_driving, sle_path};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (kappa, dt, horizon) = (4.0, 1e-3, 1.0);
    let n = 400;
    let ends: Vec<f64> = (0..n)
        .map(|seed| sle_path(kappa, dt, horizon, seed).map(|(w, _)| w.value_at(horizon)))
        .collect::<Result<_, _>>()?;
    let mean = ends.iter().sum::<f64>() / n as f64;
    let var = ends.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    println!("{n} samples: mean W(1) = {mean:.3}, Var W(1) = {var:.3}");

    let (w, trace) = sle_path(kappa, 1e-4, 0.5, 1)?;
    let back = extract_driving(&trace, 1e-3)?;
    let err = w
        .times()
        .windows(2)
        .zip(&w.values()[1..])
        .map(|(t, x)| (back.value_at(0.5 * (t[0] + t[1])) - x).abs())
        .fold(0.0, f64::max);
    println!("trace of {} points, driving recovered to within {err:.1e}", trace.len());
    Ok(())
}
