use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use varadmm::experiment::{
    build_table, Algorithm, ProblemKind, ReferenceCache, ReferenceSpec, RunConfig, TableSpec, CACHE_DIR_ENV,
    SUMMARY_HEADER,
};
use varadmm::{build_mesh, StopKind};

/// Experiments with fixed, Fast and Variable step-size ADMM.
#[derive(Debug, Parser)]
#[command(name = "varadmm", version)]
struct Cli {
    /// Reference cache directory.
    #[arg(long, global = true, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration and print its summary line.
    Run(RunArgs),
    /// Compute (or load) a reference solution and print its cache path.
    Ref(RefArgs),
    /// Reproduce one of the iteration-count tables as CSV.
    Table(TableArgs),
    /// Print the nodes and elements of a mesh.
    Mesh {
        #[arg(long)]
        level: u32,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProblemArg {
    Obstacle,
    Rof,
}

impl From<ProblemArg> for ProblemKind {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::Obstacle => ProblemKind::Obstacle,
            ProblemArg::Rof => ProblemKind::Rof,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Admm,
    Fast,
    Variable,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Admm => Algorithm::Admm,
            AlgorithmArg::Fast => Algorithm::Fast,
            AlgorithmArg::Variable => Algorithm::Variable,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StopArg {
    RefError,
    Residual,
    DualOnly,
    PrimalOnly,
}

impl From<StopArg> for StopKind {
    fn from(s: StopArg) -> Self {
        match s {
            StopArg::RefError => StopKind::RefError,
            StopArg::Residual => StopKind::Residual,
            StopArg::DualOnly => StopKind::DualOnly,
            StopArg::PrimalOnly => StopKind::PrimalOnly,
        }
    }
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    #[arg(long)]
    level: u32,
    /// Initial step size is h^-m.
    #[arg(long = "tau-exp", value_name = "M", value_parser = clap::value_parser!(u32).range(0..=3))]
    tau_exp: u32,
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    #[arg(long, value_enum, default_value = "residual")]
    stop: StopArg,
    /// Overrides the default tolerance of the stop rule.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Overrides the default iteration cap (1000 obstacle, 10000 ROF).
    #[arg(long)]
    max_iter: Option<usize>,
    /// Write the per-iteration trace CSV here.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also print the summary header.
    #[arg(long)]
    header: bool,
}

#[derive(Debug, clap::Args)]
struct RefArgs {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    #[arg(long)]
    level: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, clap::Args)]
struct TableArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    id: u8,
    /// Comma separated levels, e.g. 3,4,5.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u32>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the table here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn cache(dir: Option<PathBuf>) -> ReferenceCache {
    match dir {
        Some(d) => ReferenceCache::with_dir(d),
        None => ReferenceCache::from_env(),
    }
}

fn cmd_run(args: RunArgs, cache: &ReferenceCache) -> Result<ExitCode> {
    let mut config = RunConfig::new(
        args.problem.into(),
        args.level,
        args.tau_exp,
        args.algorithm.into(),
        args.stop.into(),
    );
    config.eps = args.eps;
    config.seed = args.seed;
    config.max_iter = args.max_iter;
    config.validate()?;
    let outcome = config.execute(cache)?;
    if let Some(path) = &args.output {
        write_file(path, &outcome.trace_csv)?;
    }
    let mut out = std::io::stdout().lock();
    if args.header {
        writeln!(out, "{SUMMARY_HEADER}")?;
    }
    writeln!(out, "{}", outcome.summary.csv_line())?;
    Ok(if outcome.summary.capped() { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn cmd_ref(args: RefArgs, cache: &ReferenceCache) -> Result<ExitCode> {
    let spec = ReferenceSpec::for_problem(args.problem.into(), args.level, args.seed);
    let Some(path) = cache.path_for(&spec) else {
        bail!("no cache directory configured");
    };
    cache.load_or_compute(&spec)?;
    println!("{}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_table(args: TableArgs, cache: &ReferenceCache) -> Result<ExitCode> {
    let mut spec = TableSpec::new(args.id)?.with_seed(args.seed);
    if let Some(levels) = args.levels {
        spec = spec.with_levels(levels);
    }
    let (csv, cells) = build_table(&spec, cache);
    for cell in &cells {
        if let Err(e) = &cell.result {
            let c = &cell.config;
            eprintln!("warning: {} l={} m={} {}: {e}", c.problem, c.level, c.tau_exp, c.algorithm);
        }
    }
    match &args.output {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let cache = cache(cli.cache_dir);
    let result = match cli.command {
        Command::Run(args) => cmd_run(args, &cache),
        Command::Ref(args) => cmd_ref(args, &cache),
        Command::Table(args) => cmd_table(args, &cache),
        Command::Mesh { level } => build_mesh(level).map_err(Into::into).map(|m| {
            print!("{}", m.dump());
            ExitCode::SUCCESS
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
