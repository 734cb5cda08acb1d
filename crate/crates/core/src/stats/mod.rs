//! Ensembles and the statistical test suite.
//!
//! An ensemble is a list of independent samples of one process (harmonic
//! explorer, percolation exploration or SLE), sample `k` drawing all of its
//! randomness from the stream `(master_seed, k)`. Samples are generated in
//! parallel and collected in index order, so a store never depends on the
//! number of workers.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::explorer::{CoinBias, ExplorerError, ExplorerState, FairCoin, FieldBias};
use crate::harmonic::{GreenTable, HarmonicError, IncrementalExtension, SolverConfig};
use crate::lattice::{LatticeDomain, LatticeError, LatticeVertex};
use crate::loewner::{sle_driving_with, trace_points, DrivingExtractor, DrivingFunction, LoewnerError};
use crate::rng::{sample_stream, unit_coin};

pub mod ks;
mod presets;
mod suite;

pub use presets::{run_preset, PresetOptions, PRESETS};
pub use suite::*;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("sample {index}: {source}")]
    Sample { index: u64, source: Box<StatsError> },
    #[error("sample {index} stopped at capacity {reached}, before the horizon {horizon}")]
    ShortSample { index: u64, reached: f64, horizon: f64 },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error(transparent)]
    Explorer(#[from] ExplorerError),
    #[error(transparent)]
    Loewner(#[from] LoewnerError),
}

/// How to build the domain of a lattice ensemble.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainSpec {
    /// `split: None` puts the start edge on the symmetry axis.
    Box { width: usize, height: usize, split: Option<usize> },
    Hexagon { radius: usize },
}

impl DomainSpec {
    /// The box `2s × s` with a centred split.
    pub fn scaled_box(scale: usize) -> Self {
        Self::Box { width: 2 * scale, height: scale, split: None }
    }

    pub fn build(&self) -> Result<LatticeDomain, LatticeError> {
        match *self {
            Self::Box { width, height, split } => {
                LatticeDomain::build_box(width, height, split.unwrap_or_else(|| LatticeDomain::centered_split(width)))
            }
            Self::Hexagon { radius } => LatticeDomain::build_hexagon(radius),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Process {
    HarmonicExplorer,
    Percolation,
    Sle { kappa: f64, dt: f64 },
}

/// How the coin probabilities of the harmonic explorer are computed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Capacitance updates over a shared table of Green's function columns.
    Incremental {
        /// Columns are stored only on this disc around the start midpoint.
        window_radius: Option<f64>,
    },
    /// Full re-solve after each step with the configured solver.
    Field,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Run to the end edge.
    Termination,
    /// Stop once the extracted capacity reaches the horizon.
    Horizon,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleConfig {
    pub domain: Option<DomainSpec>,
    pub process: Process,
    pub n_samples: usize,
    pub master_seed: u64,
    pub horizon_t: f64,
    pub dt_max: f64,
    pub stop: StopRule,
    /// Vertices at which the final harmonic value `h_N` is recorded.
    pub probes: Vec<LatticeVertex>,
    pub engine: Engine,
    pub solver: SolverConfig,
    /// Keep the capacity-parameterised trace of every sample.
    pub keep_trace: bool,
    /// Worker threads. Has no influence on the results.
    #[serde(skip)]
    pub jobs: usize,
}

impl EnsembleConfig {
    /// Harmonic explorer on `domain`, stopped at capacity `horizon_t`.
    pub fn harmonic_explorer(domain: DomainSpec, n_samples: usize, master_seed: u64, horizon_t: f64) -> Self {
        Self {
            domain: Some(domain),
            process: Process::HarmonicExplorer,
            n_samples,
            master_seed,
            horizon_t,
            dt_max: horizon_t / 300.0,
            stop: StopRule::Horizon,
            probes: Vec::new(),
            engine: Engine::Incremental { window_radius: None },
            solver: SolverConfig::default(),
            keep_trace: false,
            jobs: 1,
        }
    }

    /// SLE(κ) sampled every `dt` up to `horizon_t`.
    pub fn sle(kappa: f64, dt: f64, n_samples: usize, master_seed: u64, horizon_t: f64) -> Self {
        Self {
            domain: None,
            process: Process::Sle { kappa, dt },
            dt_max: dt,
            ..Self::harmonic_explorer(DomainSpec::scaled_box(2), n_samples, master_seed, horizon_t)
        }
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        let bad = |m: &str| Err(StatsError::InvalidConfig(m.to_string()));
        if self.n_samples == 0 {
            return bad("n_samples must be at least 1");
        }
        if !(self.horizon_t > 0.0) {
            return bad("horizon_t must be positive");
        }
        if !(self.dt_max > 0.0) {
            return bad("dt_max must be positive");
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1");
        }
        match self.process {
            Process::Sle { kappa, dt } if !(kappa >= 0.0 && dt > 0.0) => bad("SLE needs kappa >= 0 and dt > 0"),
            Process::Sle { .. } => Ok(()),
            _ if self.domain.is_none() => bad("lattice processes need a domain"),
            _ => Ok(()),
        }
    }
}

/// A point of a sample's trace, in coordinates where the start is 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    /// Capacity of the curve up to and including this point.
    pub t: f64,
    pub z: Complex64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Sample {
    pub index: u64,
    pub steps: usize,
    pub terminated: bool,
    pub horizon_reached: bool,
    /// Final value of `h_N` at each probe: the colour when the probe was
    /// determined, the harmonic extension otherwise.
    pub probe_values: Vec<f64>,
    /// The driving function up to the horizon (or as far as the curve went).
    pub driving: DrivingFunction,
    #[serde(skip)]
    pub trace: Vec<TracePoint>,
}

impl Sample {
    /// `W(t)`, or an error if the sample did not reach `t`.
    pub fn w(&self, t: f64) -> Result<f64, StatsError> {
        if t > self.driving.horizon() * (1.0 + 1e-12) {
            return Err(StatsError::ShortSample { index: self.index, reached: self.driving.horizon(), horizon: t });
        }
        Ok(self.driving.value_at(t))
    }

    /// The trace point where the capacity first reaches `t`.
    pub fn tip(&self, t: f64) -> Option<Complex64> {
        self.trace.iter().find(|p| p.t >= t).map(|p| p.z)
    }

    /// Trace points with capacity at most `t`, plus the tip at `t`.
    pub fn trace_until(&self, t: f64) -> Vec<Complex64> {
        let k = self.trace.partition_point(|p| p.t < t);
        self.trace[..(k + 1).min(self.trace.len())].iter().map(|p| p.z).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleStore {
    pub config: EnsembleConfig,
    pub samples: Vec<Sample>,
}

impl SampleStore {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `W(t)` of every sample.
    pub fn w_at(&self, t: f64) -> Result<Vec<f64>, StatsError> {
        self.samples.iter().map(|s| s.w(t)).collect()
    }

    /// One row per sample: steps, flags, probe values and `W` at each checkpoint (empty beyond the sample's horizon).
    pub fn write_csv<W: Write>(&self, checkpoints: &[f64], mut out: W) -> std::io::Result<()> {
        write!(out, "sample,steps,terminated,horizon_reached")?;
        for k in 0..self.config.probes.len() {
            write!(out, ",probe_{k}")?;
        }
        for t in checkpoints {
            write!(out, ",w_{t}")?;
        }
        writeln!(out)?;
        for s in &self.samples {
            write!(out, "{},{},{},{}", s.index, s.steps, s.terminated, s.horizon_reached)?;
            for v in &s.probe_values {
                write!(out, ",{v}")?;
            }
            for &t in checkpoints {
                match s.w(t) {
                    Ok(w) => write!(out, ",{w}")?,
                    Err(_) => write!(out, ",")?,
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Runs `f` on a pool of `jobs` threads.
pub fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, StatsError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| StatsError::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

enum Sampler {
    Incremental(Arc<GreenTable>),
    Field(Arc<LatticeDomain>),
    Percolation(Arc<LatticeDomain>),
    Sle,
}

/// Generates the ensemble described by `cfg`.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<SampleStore, StatsError> {
    cfg.validate()?;
    let sampler = match (cfg.process, &cfg.domain) {
        (Process::Sle { .. }, _) => Sampler::Sle,
        (_, None) => unreachable!("validated"),
        (Process::Percolation, Some(spec)) => Sampler::Percolation(Arc::new(spec.build()?)),
        (Process::HarmonicExplorer, Some(spec)) => {
            let d = Arc::new(spec.build()?);
            match cfg.engine {
                Engine::Field => Sampler::Field(d),
                Engine::Incremental { window_radius: Some(r) } => {
                    Sampler::Incremental(Arc::new(GreenTable::with_window(&d, d.v_start().position(), r)))
                }
                Engine::Incremental { window_radius: None } => Sampler::Incremental(Arc::new(GreenTable::new(&d))),
            }
        }
    };
    let samples = with_pool(cfg.jobs, || {
        (0..cfg.n_samples as u64)
            .into_par_iter()
            .map(|k| run_sample(cfg, &sampler, k).map_err(|e| StatsError::Sample { index: k, source: Box::new(e) }))
            .collect::<Result<Vec<_>, _>>()
    })??;
    Ok(SampleStore { config: cfg.clone(), samples })
}

fn run_sample(cfg: &EnsembleConfig, sampler: &Sampler, index: u64) -> Result<Sample, StatsError> {
    match sampler {
        Sampler::Incremental(table) => {
            explore(cfg, ExplorerState::with_bias(table.domain(), IncrementalExtension::new(Arc::clone(table))), index)
        }
        Sampler::Field(d) => explore(cfg, ExplorerState::with_bias(d, FieldBias::new(d, cfg.solver)?), index),
        Sampler::Percolation(d) => explore(cfg, ExplorerState::with_bias(d, FairCoin), index),
        Sampler::Sle => {
            let Process::Sle { kappa, dt } = cfg.process else { unreachable!() };
            let driving = sle_driving_with(kappa, dt, cfg.horizon_t, &mut sample_stream(cfg.master_seed, index))?;
            let trace = if cfg.keep_trace {
                driving.times().iter().zip(trace_points(&driving)).map(|(&t, z)| TracePoint { t, z }).collect()
            } else {
                Vec::new()
            };
            Ok(Sample {
                index,
                steps: driving.len() - 1,
                terminated: false,
                horizon_reached: true,
                probe_values: Vec::new(),
                driving,
                trace,
            })
        }
    }
}

fn explore<B: CoinBias>(cfg: &EnsembleConfig, mut state: ExplorerState<B>, index: u64) -> Result<Sample, StatsError> {
    let origin = state.domain().v_start().position();
    let probes = cfg
        .probes
        .iter()
        .map(|&v| state.domain().index_of(v).ok_or(StatsError::InvalidConfig(format!("probe {v} not in the domain"))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rng = sample_stream(cfg.master_seed, index);
    let mut ex = DrivingExtractor::new(cfg.dt_max)?;
    let mut trace = vec![TracePoint { t: 0.0, z: Complex64::new(0.0, 0.0) }];
    let mut used = 1;
    let mut horizon_reached = false;
    loop {
        if !horizon_reached {
            for &z in &state.path()[used..] {
                ex.push(z - origin)?;
                if cfg.keep_trace {
                    trace.push(TracePoint { t: ex.capacity(), z: z - origin });
                }
                if ex.capacity() >= cfg.horizon_t {
                    horizon_reached = true;
                    break;
                }
            }
            used = state.path().len();
        }
        if state.is_terminated() || (horizon_reached && cfg.stop == StopRule::Horizon) {
            break;
        }
        state.step(unit_coin(&mut rng))?;
    }
    if !cfg.keep_trace {
        trace.clear();
    }
    let mut probe_values = Vec::with_capacity(probes.len());
    for &i in &probes {
        probe_values.push(match state.colour(i) {
            Some(c) => f64::from(c),
            None => state.bias_mut().probability(i)?,
        });
    }
    Ok(Sample {
        index,
        steps: state.n(),
        terminated: state.is_terminated(),
        horizon_reached,
        probe_values,
        driving: ex.driving().truncated(cfg.horizon_t),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explorer::run_indexed;

    fn small() -> EnsembleConfig {
        let mut cfg = EnsembleConfig::harmonic_explorer(DomainSpec::scaled_box(10), 6, 42, 0.5);
        cfg.stop = StopRule::Termination;
        cfg.probes = vec![LatticeVertex::new(5, 3)];
        cfg
    }

    #[test]
    fn single_sample_matches_explorer_run() {
        let mut cfg = small();
        cfg.n_samples = 1;
        let store = run_ensemble(&cfg).unwrap();
        let d = Arc::new(DomainSpec::scaled_box(10).build().unwrap());
        let direct = run_indexed(&d, 42, 0, SolverConfig::direct()).unwrap();
        assert_eq!(store.samples[0].steps, direct.n());
        let i = d.index_of(LatticeVertex::new(5, 3)).unwrap();
        let expected = match direct.colour(i) {
            Some(c) => f64::from(c),
            None => direct.field().value_at(i),
        };
        assert!((store.samples[0].probe_values[0] - expected).abs() < 1e-9);
    }

    #[test]
    fn stores_do_not_depend_on_jobs() {
        let mut a = small();
        a.keep_trace = true;
        let mut b = a.clone();
        b.jobs = 3;
        let (sa, sb) = (run_ensemble(&a).unwrap(), run_ensemble(&b).unwrap());
        let csv = |s: &SampleStore| {
            let mut v = Vec::new();
            s.write_csv(&[0.1, 0.5], &mut v).unwrap();
            v
        };
        assert_eq!(csv(&sa), csv(&sb));
        assert_eq!(serde_json::to_string(&sa).unwrap(), serde_json::to_string(&sb).unwrap());
    }

    #[test]
    fn invalid_configs() {
        let mut c = small();
        c.n_samples = 0;
        assert!(run_ensemble(&c).is_err());
        let mut c = small();
        c.horizon_t = 0.0;
        assert!(run_ensemble(&c).is_err());
        let mut c = small();
        c.domain = None;
        assert!(run_ensemble(&c).is_err());
    }

    #[test]
    fn sle_samples_have_the_requested_grid() {
        let cfg = EnsembleConfig::sle(4.0, 0.01, 3, 1, 0.5);
        let store = run_ensemble(&cfg).unwrap();
        assert!(store.samples.iter().all(|s| s.steps == 50 && (s.driving.horizon() - 0.5).abs() < 1e-12));
    }
}
