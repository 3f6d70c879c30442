//! The `bandit` command line.
//!
//! Exit codes: 0 success, 1 I/O or plotting failure, 2 config error,
//! 3 instance invariant violation.

pub mod config;
pub mod output;
pub mod plot;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::bounds::{lai_robbins_constant, lower_bound_unimodal, BoundReport};
use crate::harness::{run_experiment_with_workers, AggregateResult};
use crate::model::{check_unimodal, Verdict};
use crate::policy::PolicySpec;
pub use config::{ConfigFile, InstanceSource, Overrides};
use output::{aggregate_csv, fmt_num, read_aggregate, runs_csv};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] crate::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("plot: {0}")]
    Plot(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use crate::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Model(E::Config(_) | E::GammaTooSmall(_) | E::InfiniteGammaUnsupported(_)) => 2,
            CliError::Model(_) => 3,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Plot(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bandit", version, about = "Rank-one and unimodal bandit experiments")]
pub struct Cli {
    /// Base seed, overriding the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of runs per policy, overriding the config file.
    #[arg(long, global = true)]
    pub runs: Option<usize>,
    /// Horizon T, overriding the config file.
    #[arg(long, global = true)]
    pub horizon: Option<u64>,
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every configured policy and write runs.csv, aggregate.csv and summary.txt.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run UTS once per value of the config's `gammas` list.
    SweepGamma {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the asymptotic lower-bound constant with its per-arm terms.
    Bounds {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check the instance is unimodal on its graph.
    CheckUnimodal {
        #[arg(long)]
        config: PathBuf,
    },
    /// Render an aggregate CSV as an SVG chart.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Logarithmic time axis with the lower-bound reference line.
        #[arg(long)]
        log_time: bool,
    },
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            runs: self.runs,
            horizon: self.horizon,
        }
    }
}

/// Everything `simulate`/`sweep-gamma` need besides the config path.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub overrides: Overrides,
    pub workers: Option<usize>,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load(config: &Path, overrides: Overrides) -> Result<ConfigFile, CliError> {
    let mut file = ConfigFile::load(config)?;
    file.apply(overrides);
    Ok(file)
}

fn summary(file: &ConfigFile, result: &AggregateResult) -> Result<String, CliError> {
    let (_, means) = file.instance.graph_and_means()?;
    let unstructured = lai_robbins_constant(&means)?;
    let mut s = String::new();
    let _ = writeln!(s, "seed: {}", file.seed);
    let _ = writeln!(s, "horizon: {}", file.horizon.unwrap_or_default());
    let _ = writeln!(s, "runs: {}", file.runs.unwrap_or_default());
    let _ = writeln!(s, "arms: {}", means.len());
    let _ = writeln!(s, "lower_bound_constant: {}", fmt_num(result.lower_bound.constant));
    let _ = writeln!(s, "lai_robbins_constant: {}", fmt_num(unstructured.constant));
    let _ = writeln!(s, "policy,final_mean_regret,std_err,p10,p90");
    for p in &result.policies {
        let last = p.mean.len().saturating_sub(1);
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            p.label,
            fmt_num(p.final_mean()),
            fmt_num(p.final_std_err()),
            fmt_num(p.p10.get(last).copied().unwrap_or(0.0)),
            fmt_num(p.p90.get(last).copied().unwrap_or(0.0)),
        );
    }
    Ok(s)
}

fn write_outputs(out: &Path, file: &ConfigFile, result: &AggregateResult) -> Result<String, CliError> {
    let runs = runs_csv(result)?;
    let aggregate = aggregate_csv(result)?;
    let text = summary(file, result)?;
    std::fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    write_file(&out.join("runs.csv"), &runs)?;
    write_file(&out.join("aggregate.csv"), &aggregate)?;
    write_file(&out.join("summary.txt"), text.as_bytes())?;
    Ok(text)
}

/// Runs the configured experiment and writes its files into `out`.
/// Returns the summary text.
pub fn cmd_simulate(config: &Path, out: &Path, opts: &RunOptions) -> Result<String, CliError> {
    let file = load(config, opts.overrides)?;
    let experiment = file.experiment(None)?;
    let result = run_experiment_with_workers(&experiment, opts.workers)?;
    write_outputs(out, &file, &result)
}

/// One UTS experiment per entry of the config's `gammas`, on a shared
/// instance; policies are labelled `uts-g<gamma>`.
pub fn cmd_sweep_gamma(config: &Path, out: &Path, opts: &RunOptions) -> Result<String, CliError> {
    let file = load(config, opts.overrides)?;
    let gammas = file
        .gammas
        .clone()
        .ok_or_else(|| CliError::Config("sweep-gamma needs a `gammas` list".into()))?;
    if gammas.is_empty() {
        return Err(CliError::Config("`gammas` is empty".into()));
    }
    let policies = gammas
        .into_iter()
        .map(|gamma| PolicySpec::Uts { gamma }.validate())
        .collect::<Result<Vec<_>, _>>()?;
    let experiment = file.experiment(Some(policies))?;
    let result = run_experiment_with_workers(&experiment, opts.workers)?;
    write_outputs(out, &file, &result)
}

fn report_rows(s: &mut String, name: &str, report: &BoundReport) {
    let _ = writeln!(s, "# {name}");
    let _ = writeln!(s, "vertex,gap,kl,term");
    for t in &report.terms {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            t.vertex,
            fmt_num(t.gap),
            fmt_num(t.kl),
            fmt_num(t.term)
        );
    }
    let _ = writeln!(s, "total,,,{}", fmt_num(report.constant));
    if report.degenerate {
        let _ = writeln!(s, "# note: optimal mean is 1; infinite-kl terms contribute 0");
    }
}

/// Structured lower bound (neighbors of the optimum) and the unstructured
/// constant, as text.
pub fn cmd_bounds(config: &Path, overrides: Overrides) -> Result<String, CliError> {
    let file = load(config, overrides)?;
    let (graph, means) = file.instance.graph_and_means()?;
    let structured = lower_bound_unimodal(&graph, &means)?;
    let unstructured = lai_robbins_constant(&means)?;
    let mut s = String::new();
    let _ = writeln!(s, "seed: {}", file.seed);
    report_rows(&mut s, "lower_bound", &structured);
    report_rows(&mut s, "lai_robbins", &unstructured);
    Ok(s)
}

/// Verdict text, and whether the instance is unimodal.
pub fn cmd_check_unimodal(config: &Path, overrides: Overrides) -> Result<(String, bool), CliError> {
    let file = load(config, overrides)?;
    let (graph, means) = file.instance.graph_and_means()?;
    let verdict = check_unimodal(&graph, &means)?;
    let mut s = String::new();
    let _ = writeln!(s, "seed: {}", file.seed);
    match &verdict {
        Verdict::Unimodal { optimum } => {
            let _ = write!(s, "unimodal: optimum at vertex {optimum}");
            if let InstanceSource::RankOne(r) = &file.instance {
                let _ = write!(s, " (entry {})", r.entry(*optimum));
            }
            s.push('\n');
        }
        Verdict::Violation(v) => {
            let _ = writeln!(s, "violation: {v}");
        }
    }
    Ok((s, verdict.is_unimodal()))
}

/// Renders `input` (an aggregate CSV) to `out`. Nothing is written on error.
pub fn cmd_plot(input: &Path, out: &Path, log_time: bool) -> Result<(), CliError> {
    let series = read_aggregate(input)?;
    let svg = plot::render_svg(&series, log_time);
    write_file(out, svg.as_bytes())
}

/// Parses the process arguments, runs the subcommand and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    let opts = RunOptions {
        overrides: cli.overrides(),
        workers: cli.workers,
    };
    match &cli.command {
        Command::Simulate { config, out } => {
            print!("{}", cmd_simulate(config, out, &opts)?);
        }
        Command::SweepGamma { config, out } => {
            print!("{}", cmd_sweep_gamma(config, out, &opts)?);
        }
        Command::Bounds { config } => {
            print!("{}", cmd_bounds(config, opts.overrides)?);
        }
        Command::CheckUnimodal { config } => {
            let (text, ok) = cmd_check_unimodal(config, opts.overrides)?;
            print!("{text}");
            if !ok {
                return Ok(3);
            }
        }
        Command::Plot {
            input,
            out,
            log_time,
        } => cmd_plot(input, out, *log_time)?,
    }
    Ok(0)
}
