use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use segeval::NoiseKind;
use segeval_cli::{
    cmd_evaluate, cmd_noise, cmd_oracle, cmd_synth, exit_code, parse_levels, parse_metric_arg, parse_stats,
    OutputFormat, DEFAULT_REPLICATES, DEFAULT_SEED, EXIT_INPUT,
};

/// Segment-level meta-evaluation of MT metrics.
#[derive(Debug, Parser)]
#[command(name = "segeval", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score and rank metrics against human scores.
    Evaluate {
        #[arg(long)]
        human: PathBuf,
        /// `name=path`, repeatable
        #[arg(long = "metric", required = true, value_parser = parse_metric_arg)]
        metrics: Vec<(String, PathBuf)>,
        #[arg(long, default_value = "segwise,global,acceq,pdp", value_parser = parse_stats)]
        stats: StatList,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Sensitivity-to-degradation curves of statistics under noise added to human scores.
    Noise {
        #[arg(long)]
        human: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        kind: NoiseKind,
        /// comma separated, strictly increasing
        #[arg(long, allow_hyphen_values = true, value_parser = parse_levels)]
        levels: LevelList,
        #[arg(long, default_value = "segwise,global,acceq,pdp", value_parser = parse_stats)]
        stats: StatList,
        #[arg(long, default_value_t = DEFAULT_REPLICATES)]
        replicates: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank MQM error categories by how well each statistic rewards their oracle metric.
    Oracle {
        #[arg(long)]
        mqm: PathBuf,
        /// score file whose axes define the evaluated cells
        #[arg(long)]
        human: Option<PathBuf>,
        #[arg(long, default_value = "acceq,pdp", value_parser = parse_stats)]
        stats: StatList,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Write a synthetic MQM-like human score matrix.
    Synth {
        #[arg(long)]
        systems: usize,
        #[arg(long)]
        segments: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

// clap treats a bare Vec value as "many args"; wrap to keep one comma list per flag
type StatList = Vec<segeval::Statistic>;
type LevelList = Vec<f64>;

fn parse_kind(s: &str) -> Result<NoiseKind> {
    Ok(s.parse()?)
}

fn run(cli: Cli) -> Result<()> {
    let (bytes, out) = match cli.command {
        Command::Evaluate {
            human,
            metrics,
            stats,
            out,
            format,
        } => (cmd_evaluate(&human, &metrics, &stats, format)?, out),
        Command::Noise {
            human,
            kind,
            levels,
            stats,
            replicates,
            seed,
            out,
        } => (cmd_noise(&human, kind, &levels, &stats, replicates, seed)?, out),
        Command::Oracle {
            mqm,
            human,
            stats,
            out,
            format,
        } => (cmd_oracle(&mqm, human.as_deref(), &stats, format)?, out),
        Command::Synth {
            systems,
            segments,
            seed,
            out,
        } => (cmd_synth(systems, segments, seed)?, out),
    };
    match out {
        Some(path) => std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes)?;
            Ok(stdout.flush()?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INPUT as u8),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
