//! Named test suites, as run by `hexp stats --preset`.

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use super::*;

pub const PRESETS: [&str; 6] = ["sle4-control", "he-vs-bm", "h-martingale", "profile", "hitting", "he-vs-sle"];

/// Overrides shared by all presets; `None` keeps the preset's default.
#[derive(Clone, Debug, Serialize)]
pub struct PresetOptions {
    pub scale: Option<usize>,
    pub n_samples: Option<usize>,
    pub seed: u64,
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for PresetOptions {
    fn default() -> Self {
        Self { scale: None, n_samples: None, seed: 20_240_601, jobs: 1 }
    }
}

/// A finished preset: the report plus the raw stores behind it.
pub struct PresetOutput {
    pub report: TestReport,
    /// `(name, store, checkpoints)` for the per-sample CSVs.
    pub stores: Vec<(String, SampleStore, Vec<f64>)>,
}

/// Window radius for the Green's function table of the driving presets.
const WINDOW_RADIUS: f64 = 80.0;
/// Relative `Var W/t` band for the harmonic explorer (pilot calibrated).
const HE_VAR_BAND: f64 = 0.15;

struct Timer(Instant);

impl Timer {
    fn lap(&mut self, report: &mut TestReport, stage: &str) {
        report.runtimes.push((stage.to_string(), self.0.elapsed().as_secs_f64()));
        self.0 = Instant::now();
    }
}

/// Runs the preset `name`.
pub fn run_preset(name: &str, opts: &PresetOptions) -> Result<PresetOutput, StatsError> {
    if opts.jobs == 0 {
        return Err(StatsError::InvalidConfig("jobs must be at least 1".into()));
    }
    match name {
        "sle4-control" => sle4_control(opts),
        "he-vs-bm" => he_vs_bm(opts),
        "h-martingale" => h_martingale(opts),
        "profile" => profile(opts),
        "hitting" => hitting(opts),
        "he-vs-sle" => he_vs_sle(opts),
        other => Err(StatsError::UnknownPreset(other.to_string())),
    }
}

fn sle4_control(opts: &PresetOptions) -> Result<PresetOutput, StatsError> {
    let mut timer = Timer(Instant::now());
    let mut cfg = EnsembleConfig::sle(4.0, 1e-4, opts.n_samples.unwrap_or(2000), opts.seed, 1.0);
    cfg.jobs = opts.jobs;
    let tests = DrivingTestConfig::new(vec![0.25, 0.5, 1.0], 0.05, "");
    let angle_z = Complex64::new(0.0, 2.0);
    let angle_times = [0.25, 0.5];
    let mut report = TestReport::new(
        opts.seed,
        json!({ "preset": "sle4-control", "ensemble": cfg, "tests": tests, "angle_z": [0.0, 2.0], "angle_times": angle_times }),
    );
    let store = run_ensemble(&cfg)?;
    timer.lap(&mut report, "ensemble");
    report.entries.extend(test_driving_bm(&store, &tests)?);
    report.entries.extend(test_angle_martingale(&store, angle_z, &angle_times)?);
    timer.lap(&mut report, "tests");
    Ok(PresetOutput { report, stores: vec![("sle4".into(), store, tests.checkpoints)] })
}

/// Harmonic explorer on the centred boxes of `scale/2` and `scale`, each with
/// horizon `scale²/10⁴`, and percolation on the larger box.
///
/// Only the statements at the horizon are gated: the mean at both scales,
/// the `Var W/T` band at the larger scale, its improvement over the smaller
/// one, and the percolation comparison. Earlier checkpoints, the increment
/// KS test and the quadratic variation are reported for inspection.
fn he_vs_bm(opts: &PresetOptions) -> Result<PresetOutput, StatsError> {
    let mut timer = Timer(Instant::now());
    let scale = opts.scale.unwrap_or(200);
    let m = opts.n_samples.unwrap_or(2000);
    let scales = [scale / 2, scale];
    let mut report = TestReport::new(opts.seed, json!({ "preset": "he-vs-bm", "scales": scales, "samples": m }));
    let mut stores = Vec::new();
    let mut deviations = Vec::new();
    let mut configs = Vec::new();
    for (k, &s) in scales.iter().enumerate() {
        let horizon = (s * s) as f64 / 1e4;
        let mut he = EnsembleConfig::harmonic_explorer(DomainSpec::scaled_box(s), m, opts.seed, horizon);
        he.engine = Engine::Incremental { window_radius: Some(WINDOW_RADIUS) };
        he.jobs = opts.jobs;
        let checkpoints: Vec<f64> = [0.125, 0.25, 0.5, 1.0].iter().map(|f| f * horizon).collect();
        let mut tests = DrivingTestConfig::new(checkpoints.clone(), HE_VAR_BAND, &format!("s{s}_he_"));
        tests.tol_qv = Some(HE_VAR_BAND);
        let store = run_ensemble(&he)?;
        timer.lap(&mut report, &format!("he_ensemble@{s}"));
        let at_horizon = |name: &str| name.ends_with(&format!("@{horizon}"));
        let last = k + 1 == scales.len();
        report.entries.extend(test_driving_bm(&store, &tests)?.into_iter().map(|mut e| {
            e.gated = at_horizon(&e.name) && (e.name.contains("mean_w") || last);
            e
        }));
        let (_, sd) = mean_sd(&store.w_at(horizon)?);
        deviations.push((sd * sd / horizon - 4.0).abs());
        if last {
            let mut perc = EnsembleConfig { process: Process::Percolation, ..he.clone() };
            perc.jobs = opts.jobs;
            let perc_store = run_ensemble(&perc)?;
            timer.lap(&mut report, "percolation_ensemble");
            let mut perc_tests = tests.clone();
            perc_tests.label = format!("s{s}_perc_");
            report.entries.extend(test_driving_bm(&perc_store, &perc_tests)?.into_iter().map(TestEntry::ungated));
            report.entries.push(compare_variance(&store, &perc_store, horizon)?);
            configs.push(json!({ "percolation": perc }));
            stores.push((format!("percolation_scale{s}"), perc_store, checkpoints.clone()));
        }
        configs.push(json!({ "he": he, "tests": tests }));
        stores.push((format!("he_scale{s}"), store, checkpoints));
    }
    report.config["runs"] = json!(configs);
    report.entries.push(TestEntry {
        name: "var_deviation_decreases_with_scale".into(),
        anchor: "the driving function tends to a Brownian motion with variance 4".into(),
        statistic: deviations[1],
        expected: deviations[0],
        tolerance: 0.0,
        p_value: None,
        samples: m,
        passed: deviations[1] < deviations[0],
        gated: true,
    });
    Ok(PresetOutput { report, stores })
}

fn h_martingale(opts: &PresetOptions) -> Result<PresetOutput, StatsError> {
    let mut timer = Timer(Instant::now());
    let scale = opts.scale.unwrap_or(40);
    let spec = DomainSpec::scaled_box(scale);
    let d = Arc::new(spec.build()?);
    let probes = default_probes(&d)?;
    let mut cfg = EnsembleConfig::harmonic_explorer(spec, opts.n_samples.unwrap_or(10_000), opts.seed, 1.0);
    cfg.stop = StopRule::Termination;
    cfg.probes = probes.iter().map(|p| p.0).collect();
    cfg.jobs = opts.jobs;
    let h0: Vec<f64> = probes.iter().map(|p| p.1).collect();
    let mut report = TestReport::new(opts.seed, json!({ "preset": "h-martingale", "ensemble": cfg, "h0": h0 }));
    let store = run_ensemble(&cfg)?;
    timer.lap(&mut report, "ensemble");
    for (k, &h) in h0.iter().enumerate() {
        report.entries.push(test_h_martingale(&store, k, h));
    }
    Ok(PresetOutput { report, stores: vec![("he".into(), store, Vec::new())] })
}

fn profile(opts: &PresetOptions) -> Result<PresetOutput, StatsError> {
    let mut timer = Timer(Instant::now());
    let s = opts.scale.unwrap_or(200);
    let cfg = ProfileConfig { scales: vec![s, 2 * s], ..ProfileConfig::default() };
    let mut report = TestReport::new(opts.seed, json!({ "preset": "profile", "profile": cfg }));
    report.entries = with_pool(opts.jobs, || test_harmonic_profile(&cfg))??;
    timer.lap(&mut report, "profile");
    Ok(PresetOutput { report, stores: Vec::new() })
}

fn hitting(opts: &PresetOptions) -> Result<PresetOutput, StatsError> {
    let mut timer = Timer(Instant::now());
    let s = opts.scale.unwrap_or(40);
    let spec = DomainSpec::scaled_box(s);
    let d = spec.build()?;
    // The centre of the box, relative to the start midpoint.
    let top = d.interior().iter().map(|v| v.embed().im).fold(0.0, f64::max);
    let z = Complex64::new(0.0, top / 2.0);
    let big_r = 0.4 * s as f64;
    let cfg = HitConfig {
        domain: spec,
        z,
        big_r,
        radii: vec![big_r / 2.0, big_r / 4.0, big_r / 8.0],
        n_samples: opts.n_samples.unwrap_or(2000),
        seed: opts.seed,
        jobs: opts.jobs,
    };
    let mut report = TestReport::new(opts.seed, json!({ "preset": "hitting", "hit": cfg }));
    let est = estimate_hit_probabilities(&cfg)?;
    timer.lap(&mut report, "ensemble");
    report.entries = hit_entries(&est);
    Ok(PresetOutput { report, stores: Vec::new() })
}

/// Harmonic explorer at scales `s/4` and `s` against SLE(4) with matching
/// horizons.
fn he_vs_sle(opts: &PresetOptions) -> Result<PresetOutput, StatsError> {
    let mut timer = Timer(Instant::now());
    let s = opts.scale.unwrap_or(200);
    let m = opts.n_samples.unwrap_or(500);
    let mut report = TestReport::new(opts.seed, json!({ "preset": "he-vs-sle", "scales": [s / 4, s], "samples": m }));
    let mut stores = Vec::new();
    let mut sums = Vec::new();
    for scale in [s / 4, s] {
        let horizon = (scale * scale) as f64 / 1e4;
        let mut he = EnsembleConfig::harmonic_explorer(DomainSpec::scaled_box(scale), m, opts.seed, horizon);
        he.engine = Engine::Incremental { window_radius: Some(WINDOW_RADIUS) };
        he.keep_trace = true;
        he.jobs = opts.jobs;
        let mut sle = EnsembleConfig::sle(4.0, horizon / 300.0, m, opts.seed ^ 0x51e, horizon);
        sle.keep_trace = true;
        sle.jobs = opts.jobs;
        let he_store = run_ensemble(&he)?;
        let sle_store = run_ensemble(&sle)?;
        timer.lap(&mut report, &format!("ensembles@{scale}"));
        let grid: Vec<f64> = [0.25, 0.5, 1.0].iter().map(|f| f * horizon).collect();
        let entries = compare_he_sle(&he_store, &sle_store, &grid)?;
        sums.push(entries.iter().map(|e| e.statistic).sum::<f64>());
        report.entries.extend(entries.into_iter().map(|mut e| {
            e.name = format!("scale{scale}_{}", e.name);
            e
        }));
        let r = 0.5 * horizon.sqrt();
        report.entries.push(return_entry(&he_store, &format!("scale{scale}_he_"), r, 0.25 * horizon, 0.5 * horizon));
        report.entries.push(return_entry(&sle_store, &format!("scale{scale}_sle_"), r, 0.25 * horizon, 0.5 * horizon));
        stores.push((format!("he_scale{scale}"), he_store, grid.clone()));
        stores.push((format!("sle_scale{scale}"), sle_store, grid));
    }
    report.entries.push(TestEntry {
        name: "ks_total_decreases_with_scale".into(),
        anchor: "the law of the path tends to the law of SLE(4)".into(),
        statistic: sums[1],
        expected: sums[0],
        tolerance: 0.0,
        p_value: None,
        samples: m,
        passed: sums[1] < sums[0],
        gated: true,
    });
    Ok(PresetOutput { report, stores })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_preset() {
        assert!(matches!(run_preset("nope", &PresetOptions::default()), Err(StatsError::UnknownPreset(_))));
    }

    #[test]
    fn small_presets_run() {
        let opts = PresetOptions { scale: Some(20), n_samples: Some(40), ..PresetOptions::default() };
        for name in ["h-martingale", "hitting", "he-vs-bm"] {
            let out = run_preset(name, &opts).unwrap();
            assert!(!out.report.entries.is_empty(), "{name}");
        }
    }
}
