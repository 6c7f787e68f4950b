//! `orbit-census`: exact cluster censuses, estimates and checks from the shell.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use orbit_census::{Engine, Error, Level};

use commands::Weighting;
use output::{Artifact, Format};

#[derive(Parser)]
#[command(
    name = "orbit-census",
    version,
    about = "Exact censuses of p-close periodic orbits of the baker's map"
)]
struct Cli {
    /// Directory receiving the output file.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads (defaults to the number of logical cores).
    #[arg(long, global = true, env = "ORBIT_CENSUS_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Size {
    /// Word length.
    #[arg(long)]
    n: u32,
    /// Subword length.
    #[arg(long)]
    p: u32,
}

#[derive(Args)]
struct EngineArg {
    /// Census engine: brute or best.
    #[arg(long, default_value = "best", value_parser = parse_engine)]
    engine: Engine,
}

#[derive(Subcommand)]
enum Command {
    /// Every cluster with its size.
    Census {
        #[command(flatten)]
        size: Size,
        #[command(flatten)]
        engine: EngineArg,
    },
    /// Exact moments Z_k against their estimates.
    Moments {
        #[command(flatten)]
        size: Size,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
        k: Vec<u32>,
        /// word or necklace.
        #[arg(long, default_value = "word", value_parser = parse_level)]
        level: Level,
        #[command(flatten)]
        engine: EngineArg,
    },
    /// Empirical cluster-size distribution against the limit law.
    Distribution {
        #[command(flatten)]
        size: Size,
        #[arg(long, default_value_t = 50)]
        bins: u32,
        #[command(flatten)]
        engine: EngineArg,
    },
    /// Weighted mean visits of each edge.
    Anisotropy {
        #[command(flatten)]
        size: Size,
        /// Moment weights.
        #[arg(long, value_delimiter = ',', conflicts_with = "thresholds")]
        k: Option<Vec<u32>>,
        /// Size thresholds on the scaled cluster size.
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
        #[command(flatten)]
        engine: EngineArg,
    },
    /// The largest cluster against its estimate.
    MaxCluster {
        #[command(flatten)]
        size: Size,
        #[command(flatten)]
        engine: EngineArg,
    },
    /// Number of clusters.
    CountClusters {
        #[command(flatten)]
        size: Size,
    },
    /// Every matrix identity as one pass/fail report.
    Validate {
        #[arg(long)]
        p: u32,
    },
    /// Cluster sizes or moments by Fourier inversion of trace polynomials.
    Fourier {
        #[command(flatten)]
        size: Size,
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<u32>>,
        /// Grid points per phase (default n + 1).
        #[arg(long)]
        grid: Option<u32>,
    },
    /// Whether p-close orbits lie in each other's metric neighbourhood.
    BakerCheck {
        #[command(flatten)]
        size: Size,
        /// Pair words by 2p-closeness instead of p-closeness.
        #[arg(long)]
        doubled: bool,
    },
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_level(s: &str) -> Result<Level, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Exit code for a library error.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parameter(_) | Error::State(_) | Error::Io(_) => 1,
        Error::Capacity { .. } => 2,
        Error::Validation(_) => 3,
        Error::Numerical(_) => 4,
    }
}

/// Runs the command; returns the artifact and the names of failed checks.
fn dispatch(command: Command) -> orbit_census::Result<(Artifact, Vec<String>, Option<String>)> {
    Ok(match command {
        Command::Census { size, engine } => {
            let out = commands::run_census(size.n, size.p, engine.engine)?;
            (out.artifact, Vec::new(), Some(out.summary))
        }
        Command::Moments {
            size,
            k,
            level,
            engine,
        } => (
            commands::run_moments(size.n, size.p, &k, level, engine.engine)?,
            Vec::new(),
            None,
        ),
        Command::Distribution { size, bins, engine } => (
            commands::run_distribution(size.n, size.p, bins, engine.engine)?,
            Vec::new(),
            None,
        ),
        Command::Anisotropy {
            size,
            k,
            thresholds,
            engine,
        } => {
            let w = match thresholds {
                Some(t) => Weighting::Thresholds(t),
                None => Weighting::Moments(k.unwrap_or_else(|| vec![1, 2])),
            };
            (
                commands::run_anisotropy(size.n, size.p, &w, engine.engine)?,
                Vec::new(),
                None,
            )
        }
        Command::MaxCluster { size, engine } => (
            commands::run_max_cluster(size.n, size.p, engine.engine)?,
            Vec::new(),
            None,
        ),
        Command::CountClusters { size } => (
            commands::run_count_clusters(size.n, size.p)?,
            Vec::new(),
            None,
        ),
        Command::Validate { p } => {
            let r = commands::run_validate(p)?;
            (r.artifact, r.failures, None)
        }
        Command::Fourier { size, k, grid } => (
            commands::run_fourier(size.n, size.p, k.as_deref(), grid)?,
            Vec::new(),
            None,
        ),
        Command::BakerCheck { size, doubled } => {
            let r = commands::run_baker_check(size.n, size.p, doubled)?;
            (r.artifact, r.failures, None)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        eprintln!("error: --workers must be positive");
        return ExitCode::from(1);
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
    {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let result = dispatch(cli.command).and_then(|(mut artifact, failures, summary)| {
        artifact.param("workers", workers);
        let path = artifact.write(&cli.out, cli.format)?;
        if let Some(s) = summary {
            println!("{s}");
        }
        println!("wrote {}", path.display());
        Ok(failures)
    });
    match result {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            eprintln!("failed checks: {}", failures.join(", "));
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
