//! A small harmonic explorer ensemble: the terminal colour at a few probe
//! vertices against the initial harmonic function, and the spread of the
//! driving function at the horizon. The box is small, so the variance is
//! still far from its scaling limit; `hexp stats --preset he-vs-bm` runs the
//! same measurement at scales 100 and 200.
//!
//! cargo run --release --example ensemble [samples] [jobs]

use std::sync::Arc;

use harmonic_explorer::stats::{
    default_probes, mean_sd, run_ensemble, test_h_martingale, DomainSpec, EnsembleConfig, StopRule,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let samples = args.next().map(|s| s.parse()).transpose()?.unwrap_or(400);
    let jobs = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);

    let spec = DomainSpec::scaled_box(20);
    let domain = Arc::new(spec.build()?);
    let probes = default_probes(&domain)?;

    let mut cfg = EnsembleConfig::harmonic_explorer(spec, samples, 11, 0.04);
    cfg.stop = StopRule::Termination;
    cfg.probes = probes.iter().map(|p| p.0).collect();
    cfg.jobs = jobs;
    let store = run_ensemble(&cfg)?;

    for (k, (v, h0)) in probes.iter().enumerate() {
        let e = test_h_martingale(&store, k, *h0);
        println!("probe {:?}: h0 = {h0:.4}, frequency {:.4} +- {:.4}", (v.a, v.b), e.statistic, e.tolerance);
    }
    let w: Vec<f64> = store.samples.iter().map(|s| s.driving.value_at(cfg.horizon_t)).collect();
    let (mean, sd) = mean_sd(&w);
    println!("W({}) over {} samples: mean {mean:.3}, Var/t {:.3}", cfg.horizon_t, w.len(), sd * sd / cfg.horizon_t);
    Ok(())
}
