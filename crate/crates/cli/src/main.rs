use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use donsker::bernoulli::{sample_uniform_bridge, SignPath};
use donsker::coupling::{sample_coupled, CoupledTriple};
use donsker::empirical::{empirical_process, EmpiricalSample};
use donsker::reference::sample_brownian_bridge;
use donsker::replicate::replicate;
use donsker::stats::StatReport;
use donsker::study::{study_convergence, write_study_csv, StudyConfig};
use donsker::suite::{checks, Suite, REGISTERED_SEED};
use donsker::walk::{sample_conditioned_walk, LatticePath};
use donsker::{GridFunction, RngStream};

#[derive(Parser)]
#[command(name = "donsker", version, about = "Empirical processes, Poisson-walk bridges and their coupling")]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true, env = "DONSKER_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write sampled paths of one model.
    Sample(SampleArgs),
    /// Run a pre-registered verification suite; exit 1 if any check fails.
    Verify(VerifyArgs),
    /// Sweep n and write one row of convergence diagnostics per n.
    StudyConvergence(StudyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    /// The empirical process b_n on the grid k/m.
    Empirical,
    /// Centered Poisson walk conditioned to end at 0.
    PoissonBridge,
    /// Uniform ±1 bridge of length n (n even).
    BernoulliBridge,
    /// Reference Brownian bridge on the grid k/m.
    BrownianBridge,
    /// Walk, correction and bridge from the coupling.
    Coupled,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Coupling,
    Duchon,
    Empirical,
    Reference,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Coupling => Suite::Coupling,
            SuiteArg::Duchon => Suite::Duchon,
            SuiteArg::Empirical => Suite::Empirical,
            SuiteArg::Reference => Suite::Reference,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum, env = "DONSKER_MODEL")]
    model: Model,
    /// Sample size, walk length, or bridge length for bernoulli-bridge.
    #[arg(long, default_value_t = 100, env = "DONSKER_N")]
    n: usize,
    #[arg(long, default_value_t = 1, env = "DONSKER_REPS")]
    reps: u64,
    #[arg(long, default_value_t = REGISTERED_SEED, env = "DONSKER_SEED")]
    seed: u64,
    /// Grid size m for empirical and brownian-bridge (default: n).
    #[arg(long, env = "DONSKER_GRID")]
    grid: Option<usize>,
    /// Output file; CSV with several reps writes one file per rep with an
    /// `_<i>` suffix. Defaults to stdout.
    #[arg(long, env = "DONSKER_OUT")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json, env = "DONSKER_FORMAT")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long, default_value_t = REGISTERED_SEED, env = "DONSKER_SEED")]
    seed: u64,
    /// Where to write the JSON array of reports (default: stdout).
    #[arg(long, env = "DONSKER_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000", env = "DONSKER_N")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 10_000, env = "DONSKER_REPS")]
    reps: u64,
    #[arg(long, default_value_t = REGISTERED_SEED, env = "DONSKER_SEED")]
    seed: u64,
    #[arg(long, default_value_t = 0.5, env = "DONSKER_EPSILON")]
    epsilon: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75", env = "DONSKER_TIMES")]
    times: Vec<f64>,
    #[arg(long, env = "DONSKER_OUT")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv, env = "DONSKER_FORMAT")]
    format: Format,
}

/// Error raised for bad arguments that clap cannot see; exits with 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

enum Sampled {
    Grid(GridFunction),
    Lattice(LatticePath),
    Sign(SignPath),
    Triple(CoupledTriple),
}

impl Sampled {
    fn to_json(&self) -> serde_json::Result<String> {
        match self {
            Sampled::Grid(g) => serde_json::to_string(g),
            Sampled::Lattice(p) => serde_json::to_string(p),
            Sampled::Sign(p) => serde_json::to_string(p),
            Sampled::Triple(t) => serde_json::to_string(t),
        }
    }

    fn write_csv<W: Write>(&self, out: W) -> donsker::Result<()> {
        match self {
            Sampled::Grid(g) => g.write_csv(out),
            Sampled::Lattice(p) => p.write_csv(out),
            // Bernoulli bridges are written as their positions S_0..S_2n.
            Sampled::Sign(p) => LatticePath::new(p.positions())?.write_csv(out),
            Sampled::Triple(t) => t.write_csv(out),
        }
    }
}

fn draw(model: Model, n: usize, m: usize, rng: &mut RngStream) -> donsker::Result<Sampled> {
    Ok(match model {
        Model::Empirical => {
            let s = EmpiricalSample::sample(n, rng)?;
            let values = (0..=m)
                .map(|k| empirical_process(&s, k as f64 / m as f64))
                .collect::<donsker::Result<Vec<_>>>()?;
            Sampled::Grid(GridFunction::new(values)?)
        }
        Model::PoissonBridge => Sampled::Lattice(sample_conditioned_walk(n, rng)?),
        Model::BernoulliBridge => Sampled::Sign(sample_uniform_bridge(n, rng)?),
        Model::BrownianBridge => Sampled::Grid(sample_brownian_bridge(m, rng)?),
        Model::Coupled => Sampled::Triple(sample_coupled(n, rng)?),
    })
}

fn open(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

/// `paths.csv` -> `paths_3.csv`.
fn numbered(path: &Path, i: u64) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{i}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{i}"),
    };
    path.with_file_name(name)
}

fn cmd_sample(a: SampleArgs) -> anyhow::Result<ExitCode> {
    if a.n == 0 || a.reps == 0 || a.grid == Some(0) {
        return Err(usage("--n, --reps and --grid must be positive"));
    }
    if matches!(a.model, Model::BernoulliBridge) && !a.n.is_multiple_of(2) {
        return Err(usage("bernoulli-bridge needs an even --n"));
    }
    if a.format == Format::Csv && a.reps > 1 && a.out.is_none() {
        return Err(usage("CSV output of several reps needs --out"));
    }
    let m = a.grid.unwrap_or(a.n);
    let paths = replicate(a.seed, a.reps, |rng| draw(a.model, a.n, m, rng))
        .into_iter()
        .collect::<donsker::Result<Vec<_>>>()?;
    match a.format {
        Format::Json => {
            let items = paths.iter().map(Sampled::to_json).collect::<serde_json::Result<Vec<_>>>()?;
            let mut w = open(a.out.as_deref())?;
            writeln!(w, "[{}]", items.join(","))?;
            w.flush()?;
        }
        Format::Csv if paths.len() == 1 => paths[0].write_csv(open(a.out.as_deref())?)?,
        Format::Csv => {
            let base = a.out.as_deref().expect("checked above");
            for (i, p) in paths.iter().enumerate() {
                p.write_csv(open(Some(&numbered(base, i as u64)))?)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_reports(reports: &[StatReport], out: Option<&Path>) -> anyhow::Result<()> {
    let mut w = open(out)?;
    serde_json::to_writer_pretty(&mut w, reports)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> anyhow::Result<ExitCode> {
    let mut reports = Vec::new();
    for check in checks(a.suite.into()) {
        match (check.run)(a.seed) {
            Ok(rs) => {
                for r in &rs {
                    eprintln!("{r}");
                }
                reports.extend(rs);
            }
            Err(e) => {
                // Keep what already ran.
                write_reports(&reports, a.out.as_deref())?;
                return Err(e).with_context(|| format!("check {} failed to run", check.name));
            }
        }
    }
    write_reports(&reports, a.out.as_deref())?;
    let failed = reports.iter().filter(|r| !r.passed).count();
    eprintln!("{} checks, {failed} failed", reports.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_study(a: StudyArgs) -> anyhow::Result<ExitCode> {
    if a.n.contains(&0) || a.reps < 2 || !(a.epsilon > 0.0) {
        return Err(usage("--n entries must be positive, --reps >= 2 and --epsilon > 0"));
    }
    if a.times.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(usage("--times must lie in [0, 1]"));
    }
    let rows = study_convergence(&StudyConfig {
        n_list: a.n,
        reps: a.reps,
        seed: a.seed,
        t: 0.5,
        epsilon: a.epsilon,
        times: a.times,
    })?;
    let mut w = open(a.out.as_deref())?;
    match a.format {
        Format::Csv => write_study_csv(&rows, &mut w)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &rows)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!(usage("--jobs must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Verify(a) => cmd_verify(a),
        Command::StudyConvergence(a) => cmd_study(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage_error = e.downcast_ref::<Usage>().is_some()
                || matches!(e.downcast_ref::<donsker::Error>(), Some(donsker::Error::InvalidArgument(_)));
            ExitCode::from(if usage_error { 2 } else { 1 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbered_paths() {
        assert_eq!(numbered(Path::new("out/paths.csv"), 3), PathBuf::from("out/paths_3.csv"));
        assert_eq!(numbered(Path::new("paths"), 0), PathBuf::from("paths_0"));
    }
}
