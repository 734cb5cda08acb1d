//! The `hexp` command line.
//!
//! Exit status: 0 on success, 1 when a test fails or a run breaks, 2 on a
//! usage error. Every output set gets a `RunManifest` that replays it.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::excursion::{edge_sets, summarize, ExcursionSpec};
use crate::explorer::{
    run_indexed, write_path_csv, write_step_log_csv, ExplorerState, FairCoin, StepRecord,
};
use crate::harmonic::{GreenTable, IncrementalExtension, SolverConfig, SolverMethod};
use crate::lattice::{LatticeDomain, LatticeError};
use crate::loewner::{extract_driving, sle_path, write_trace_csv, HCurve};
use crate::rng::{sample_stream, unit_coin};
use crate::stats::{self, run_preset, PresetOptions, StatsError, PRESETS};
use crate::verify::{run_verify, Corpus, VerifyConfig};

pub mod config;
pub mod svg;

#[derive(Debug, Parser)]
#[command(name = "hexp", version, about = "Harmonic explorer, SLE(4) and discrete excursion toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a domain and write it as HEDOM (optionally as SVG too).
    Domain(DomainArgs),
    /// Sample harmonic explorer or percolation interfaces.
    Run(RunArgs),
    /// Extract the driving function of a path CSV.
    Driving(DrivingArgs),
    /// Sample a chordal SLE trace and its driving function.
    Sle(SleArgs),
    /// Run the exact-identity suite.
    Verify(VerifyArgs),
    /// Run a statistical preset.
    Stats(StatsArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

fn parse_box(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    Ok((w.trim().parse().map_err(|e| format!("{e}"))?, h.trim().parse().map_err(|e| format!("{e}"))?))
}

#[derive(Debug, Args)]
struct DomainArgs {
    /// Box domain, e.g. `40x20`.
    #[arg(long = "box", value_parser = parse_box, conflicts_with = "hexagon", required_unless_present = "hexagon")]
    box_size: Option<(usize, usize)>,
    /// Split offset of the box (default: centred).
    #[arg(long, requires = "box_size")]
    split: Option<usize>,
    /// Hexagon of the given radius.
    #[arg(long)]
    hexagon: Option<usize>,
    #[arg(long, default_value = "domain.hedom")]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    /// Capacitance updates over cached Green's function columns.
    Incremental,
    /// Full re-solve after every step with `--solver`.
    Field,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Direct,
    Cg,
    Gs,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// HEDOM domain file.
    #[arg(long)]
    domain: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fair coins instead of harmonic ones.
    #[arg(long)]
    percolation: bool,
    #[arg(long, default_value_t = 1)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum, default_value = "incremental")]
    engine: EngineArg,
    #[arg(long, value_enum, default_value = "cg")]
    solver: SolverArg,
    #[arg(long, default_value = "run_out")]
    out: PathBuf,
    /// Also draw sample 0 over the domain.
    #[arg(long)]
    svg: bool,
}

#[derive(Debug, Args)]
struct DrivingArgs {
    /// CSV whose last two columns are x and y; the curve is translated so
    /// that its first point is 0.
    #[arg(long)]
    path: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    dt_max: f64,
    #[arg(long, default_value = "driving.csv")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SleArgs {
    #[arg(long, default_value_t = 4.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    /// Capacity horizon.
    #[arg(long = "T", default_value_t = 1.0)]
    horizon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "sle_out")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CorpusArg {
    Default,
    Tiny,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "default")]
    corpus: CorpusArg,
    /// Include the dense fundamental-matrix cross-check (tiny corpus).
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Negative control: add this to every discrepancy.
    #[arg(long, default_value_t = 0.0, hide = true)]
    perturb: f64,
    #[arg(long, default_value = "verify_out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    preset: String,
    #[arg(long)]
    scale: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = PresetOptions::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "stats_out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    manifest: PathBuf,
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// The effective arguments after the subcommand, config file included.
    pub args: Vec<String>,
    pub config_file: Option<String>,
    pub config_entries: Vec<(String, String)>,
    pub master_seed: Option<u64>,
    pub version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Failed(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Failed(e.to_string())
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::Degenerate(_) => Self::Usage(e.to_string()),
            other => Self::Failed(other.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::InvalidConfig(_) | StatsError::UnknownPreset(_) | StatsError::Hypothesis(_) => {
                Self::Usage(e.to_string())
            }
            other => Self::Failed(other.to_string()),
        }
    }
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn manifest_path(out: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        out.join("manifest.json")
    } else {
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }
}

/// Splits `--config FILE` out of the arguments and splices the file's pairs
/// in right after the subcommand.
fn expand_config(args: Vec<String>) -> Result<(Vec<String>, Option<String>, Vec<(String, String)>), CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut file = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            file = Some(it.next().ok_or_else(|| CliError::Usage("--config needs a file".into()))?);
        } else if let Some(f) = a.strip_prefix("--config=") {
            file = Some(f.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(f) = file else { return Ok((rest, None, Vec::new())) };
    let pairs = config::load(Path::new(&f)).map_err(|e| CliError::Usage(e.to_string()))?;
    // rest[0] is the program name, rest[1] the subcommand.
    let at = rest.len().min(2);
    let mut out: Vec<String> = rest[..at].to_vec();
    out.extend(config::to_args(&pairs));
    out.extend_from_slice(&rest[at..]);
    Ok((out, Some(f), pairs))
}

/// Runs the command line and returns the exit status.
pub fn run_cli<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let (args, config_file, config_entries) = match expand_config(args) {
        Ok(x) => x,
        Err(e) => return report_error(e),
    };
    // Later occurrences of a flag replace earlier ones, which is how typed
    // flags override the config file.
    let command = Cli::command().args_override_self(true).mut_subcommands(|c| c.args_override_self(true));
    let parsed = command.try_get_matches_from(&args).and_then(|m| Cli::from_arg_matches(&m));
    let cli = match parsed {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let mut manifest = RunManifest {
        subcommand: args.get(1).cloned().unwrap_or_default(),
        args: args.iter().skip(2).cloned().collect(),
        config_file,
        config_entries,
        master_seed: None,
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix: now(),
        finished_unix: 0.0,
    };
    let result = match cli.command {
        Command::Domain(a) => cmd_domain(a, &mut manifest),
        Command::Run(a) => cmd_run(a, &mut manifest),
        Command::Driving(a) => cmd_driving(a, &mut manifest),
        Command::Sle(a) => cmd_sle(a, &mut manifest),
        Command::Verify(a) => cmd_verify(a, &mut manifest),
        Command::Stats(a) => cmd_stats(a, &mut manifest),
        Command::Replay(a) => return cmd_replay(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => report_error(e),
    }
}

fn report_error(e: CliError) -> i32 {
    match e {
        CliError::Usage(m) => {
            eprintln!("error: {m}");
            2
        }
        CliError::Failed(m) => {
            eprintln!("error: {m}");
            1
        }
    }
}

fn write_manifest(m: &mut RunManifest, path: &Path) -> Result<(), CliError> {
    m.finished_unix = now();
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, m).map_err(failed)?;
    writeln!(w)?;
    Ok(())
}

fn cmd_domain(a: DomainArgs, m: &mut RunManifest) -> Result<(), CliError> {
    let d = match (a.box_size, a.hexagon) {
        (Some((w, h)), _) => LatticeDomain::build_box(w, h, a.split.unwrap_or_else(|| LatticeDomain::centered_split(w.max(2))))?,
        (None, Some(r)) => LatticeDomain::build_hexagon(r)?,
        (None, None) => unreachable!("clap requires a shape"),
    };
    let mut w = create(&a.out)?;
    d.write_hedom(&mut w)?;
    w.flush()?;
    if let Some(path) = &a.svg {
        create(path)?.write_all(svg::render(&d, None).as_bytes())?;
    }
    write_manifest(m, &manifest_path(&a.out, false))
}

fn load_domain(path: &Path) -> Result<Arc<LatticeDomain>, CliError> {
    let f = File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(Arc::new(LatticeDomain::read_hedom(BufReader::new(f))?))
}

fn solver_config(s: SolverArg) -> SolverConfig {
    match s {
        SolverArg::Direct => SolverConfig::direct(),
        SolverArg::Cg => SolverConfig::default(),
        SolverArg::Gs => SolverConfig { method: SolverMethod::GaussSeidel { omega: 1.5 }, ..SolverConfig::default() },
    }
}

type RunOutput = (Vec<Complex64>, Vec<StepRecord>);

fn cmd_run(a: RunArgs, m: &mut RunManifest) -> Result<(), CliError> {
    if a.samples == 0 || a.jobs == 0 {
        return Err(CliError::Usage("--samples and --jobs must be at least 1".into()));
    }
    m.master_seed = Some(a.seed);
    let d = load_domain(&a.domain)?;
    let table = (!a.percolation && a.engine == EngineArg::Incremental).then(|| Arc::new(GreenTable::new(&d)));
    let cfg = solver_config(a.solver);
    let one = |k: u64| -> Result<RunOutput, String> {
        if a.percolation {
            let mut s = ExplorerState::with_bias(&d, FairCoin);
            s.run_with(&mut sample_stream(a.seed, k)).map_err(|e| e.to_string())?;
            return Ok((s.path().to_vec(), s.step_log().to_vec()));
        }
        if let Some(t) = &table {
            let mut s = ExplorerState::with_bias(&d, IncrementalExtension::new(Arc::clone(t)));
            let mut rng = sample_stream(a.seed, k);
            while !s.is_terminated() {
                s.step(unit_coin(&mut rng)).map_err(|e| e.to_string())?;
            }
            return Ok((s.path().to_vec(), s.step_log().to_vec()));
        }
        let s = run_indexed(&d, a.seed, k, cfg).map_err(|e| e.to_string())?;
        Ok((s.path().to_vec(), s.step_log().to_vec()))
    };
    let runs = stats::with_pool(a.jobs, || {
        (0..a.samples as u64).into_par_iter().map(one).collect::<Result<Vec<RunOutput>, String>>()
    })?
    .map_err(CliError::Failed)?;
    fs::create_dir_all(&a.out)?;
    for (k, (path, log)) in runs.iter().enumerate() {
        let mut w = create(&a.out.join(format!("path_{k}.csv")))?;
        write_path_csv(path, &mut w)?;
        w.flush()?;
        let mut w = create(&a.out.join(format!("steps_{k}.csv")))?;
        write_step_log_csv(log, &mut w)?;
        w.flush()?;
    }
    if a.svg {
        create(&a.out.join("path_0.svg"))?.write_all(svg::render(&d, Some(&runs[0].0)).as_bytes())?;
    }
    write_manifest(m, &manifest_path(&a.out, true))
}

/// Reads the last two columns of a CSV as points; a non-numeric first line
/// is taken as a header.
pub fn read_points_csv(path: &Path) -> Result<Vec<Complex64>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut pts = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if line.trim().is_empty() || cols.len() < 2 {
            continue;
        }
        let (x, y) = (cols[cols.len() - 2].parse::<f64>(), cols[cols.len() - 1].parse::<f64>());
        match (x, y) {
            (Ok(x), Ok(y)) => pts.push(Complex64::new(x, y)),
            _ if k == 0 => continue,
            _ => return Err(format!("{}:{}: expected numbers", path.display(), k + 1)),
        }
    }
    Ok(pts)
}

fn cmd_driving(a: DrivingArgs, m: &mut RunManifest) -> Result<(), CliError> {
    let pts = read_points_csv(&a.path).map_err(CliError::Usage)?;
    let Some(&first) = pts.first() else { return Err(CliError::Usage("empty path".into())) };
    let curve = HCurve::new(pts.iter().map(|z| z - first).collect()).map_err(|e| CliError::Usage(e.to_string()))?;
    let d = extract_driving(&curve, a.dt_max).map_err(failed)?;
    let mut w = create(&a.out)?;
    d.write_csv(&mut w)?;
    w.flush()?;
    write_manifest(m, &manifest_path(&a.out, false))
}

fn cmd_sle(a: SleArgs, m: &mut RunManifest) -> Result<(), CliError> {
    m.master_seed = Some(a.seed);
    let (d, curve) = sle_path(a.kappa, a.dt, a.horizon, a.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut w = create(&a.out.join("driving.csv"))?;
    d.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&a.out.join("trace.csv"))?;
    write_trace_csv(d.times(), curve.points(), &mut w)?;
    w.flush()?;
    write_manifest(m, &manifest_path(&a.out, true))
}

fn cmd_verify(a: VerifyArgs, m: &mut RunManifest) -> Result<(), CliError> {
    m.master_seed = Some(a.seed);
    let cfg = VerifyConfig {
        corpus: match a.corpus {
            CorpusArg::Default => Corpus::Default,
            CorpusArg::Tiny => Corpus::Tiny,
        },
        seed: a.seed,
        oracle: a.oracle,
        perturbation: a.perturb,
    };
    let report = run_verify(&cfg).map_err(failed)?;
    fs::create_dir_all(&a.out)?;
    let mut w = create(&a.out.join("verify.json"))?;
    report.write_json(&mut w)?;
    w.flush()?;
    let mut w = create(&a.out.join("verify.csv"))?;
    report.write_csv(&mut w)?;
    w.flush()?;

    // Excursion summary of the first corpus domain with all entrance edges.
    let d = crate::verify::corpus_domains(cfg.corpus, cfg.seed)?.remove(0);
    let killed = Default::default();
    let e1 = edge_sets(&d, &killed).e_out;
    let summary = summarize(&ExcursionSpec::from_edges(&d, killed, e1)).map_err(failed)?;
    let mut w = create(&a.out.join("excursion_summary.csv"))?;
    summary.write_csv(&mut w)?;
    w.flush()?;

    for c in &report.checks {
        println!(
            "{:<40} {:>6} cases  max error {:.3e}  tol {:.0e}  {}",
            c.name,
            c.cases,
            c.max_error,
            c.tolerance,
            if c.passed { "ok" } else { "FAIL" }
        );
    }
    write_manifest(m, &manifest_path(&a.out, true))?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::Failed("identity check failed".into()))
    }
}

fn cmd_stats(a: StatsArgs, m: &mut RunManifest) -> Result<(), CliError> {
    m.master_seed = Some(a.seed);
    if a.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let opts = PresetOptions { scale: a.scale, n_samples: a.samples, seed: a.seed, jobs: a.jobs };
    let out = run_preset(&a.preset, &opts)?;
    fs::create_dir_all(&a.out)?;
    let mut w = create(&a.out.join("report.json"))?;
    out.report.write_json(&mut w)?;
    w.flush()?;
    let mut w = create(&a.out.join("report.csv"))?;
    out.report.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&a.out.join("timings.csv"))?;
    out.report.write_timings(&mut w)?;
    w.flush()?;
    for (name, store, checkpoints) in &out.stores {
        let mut w = create(&a.out.join(format!("samples_{name}.csv")))?;
        store.write_csv(checkpoints, &mut w)?;
        w.flush()?;
    }
    for e in &out.report.entries {
        let verdict = match (e.passed, e.gated) {
            (true, _) => "ok",
            (false, true) => "FAIL",
            (false, false) => "fail (not gated)",
        };
        println!("{:<44} {:>12.6} (expected {:.6}, tol {:.4})  {verdict}", e.name, e.statistic, e.expected, e.tolerance);
    }
    write_manifest(m, &manifest_path(&a.out, true))?;
    if out.report.passed() {
        Ok(())
    } else {
        Err(CliError::Failed("a gated statistical test failed".into()))
    }
}

fn cmd_replay(a: ReplayArgs) -> i32 {
    let text = match fs::read_to_string(&a.manifest) {
        Ok(t) => t,
        Err(e) => return report_error(CliError::Usage(format!("{}: {e}", a.manifest.display()))),
    };
    let m: RunManifest = match serde_json::from_str(&text) {
        Ok(m) => m,
        Err(e) => return report_error(CliError::Usage(format!("{}: {e}", a.manifest.display()))),
    };
    let mut args = vec!["hexp".to_string(), m.subcommand];
    args.extend(m.args);
    run_cli(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> i32 {
        run_cli(std::iter::once("hexp").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors_exit_2() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("d.hedom");
        assert_eq!(run(&["domain", "--box", "3x1", "--out", out.to_str().unwrap()]), 2);
        assert_eq!(run(&["stats", "--preset", "nope"]), 2);
        assert_eq!(run(&["frobnicate"]), 2);
    }

    #[test]
    fn config_file_is_spliced_and_flags_win() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.conf");
        fs::write(&cfg, "box = 12x6\nout = ignored.hedom\n").unwrap();
        let out = dir.path().join("d.hedom");
        let code = run(&["domain", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
        let d = LatticeDomain::read_hedom(BufReader::new(File::open(&out).unwrap())).unwrap();
        assert_eq!(d.boundary_cycle().len(), LatticeDomain::build_box(12, 6, 5).unwrap().boundary_cycle().len());
        let manifest: RunManifest =
            serde_json::from_str(&fs::read_to_string(manifest_path(&out, false)).unwrap()).unwrap();
        assert_eq!(manifest.config_entries.len(), 2);
    }
}
