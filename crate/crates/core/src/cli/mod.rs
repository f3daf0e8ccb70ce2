//! Command-line front end: `run`, `validate` and `efficiency`.

pub mod config;
pub mod embedding_file;
pub mod run;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::simulator::Efficiency;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "streamline", about = "Slice-aware active learning experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every configured method and seed and write the result files.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Parse and validate a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Labeling efficiency of every method in a metrics file against random.
    Efficiency {
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long)]
        target: f64,
        #[arg(long, value_enum, default_value_t = MetricKind::Rare)]
        metric: MetricKind,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricKind {
    Rare,
    Full,
}

/// Exit code for an error: configuration problems map to 2, the rest to 3.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn load(path: &std::path::Path) -> crate::Result<config::ExperimentConfig> {
    let mut cfg = match config::parse_config(path) {
        Ok(c) => c,
        Err(Error::Io { path, source }) => {
            return Err(Error::config(path.display().to_string(), source.to_string()))
        }
        Err(e) => return Err(e),
    };
    let env = std::env::var(config::SEED_ENV).ok();
    config::apply_seed_override(&mut cfg, env.as_deref())?;
    Ok(cfg)
}

/// Executes a parsed command, writing human-readable output to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> crate::Result<()> {
    let io = |e: std::io::Error| Error::io("<stdout>", e);
    match cli.command {
        Command::Validate { config } => {
            let cfg = load(&config)?;
            writeln!(
                out,
                "ok: {} method(s) x {} seed(s), {} rounds",
                cfg.methods.len(),
                cfg.seeds.len(),
                cfg.stream.rounds
            )
            .map_err(io)
        }
        Command::Run {
            config,
            out: dir,
            workers,
        } => {
            let cfg = load(&config)?;
            let dir = dir
                .or_else(|| cfg.out.clone())
                .ok_or_else(|| Error::config("out", "no output directory given"))?;
            let logs = run::run(&cfg, &dir, workers)?;
            writeln!(out, "wrote {} runs to {}", logs.len(), dir.display()).map_err(io)
        }
        Command::Efficiency {
            metrics,
            target,
            metric,
        } => {
            let rows = run::read_metrics(&metrics)?;
            for (method, e) in run::efficiencies(&rows, target, metric == MetricKind::Rare) {
                match e {
                    Efficiency::Ratio(r) => writeln!(out, "{method},{r}"),
                    Efficiency::Undefined => writeln!(out, "{method},undefined"),
                }
                .map_err(io)?;
            }
            Ok(())
        }
    }
}

/// Parses `args`, executes and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    match execute(cli, &mut stdout.lock()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
