//! `run` and `compare` entry points behind the `dcsim` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, ScenarioConfig};
use crate::hdma::HdmaKind;
use crate::metrics::{fmt_sig6, write_run_csv, write_summary, RunMetrics};
use crate::sim::{run, SimError};

#[derive(Debug, Parser)]
#[command(name = "dcsim", version, about = "Dual-connectivity SN handover simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one strategy on one seed.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_hdma)]
        hdma: HdmaKind,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Simulate all three strategies on every seed.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated seeds; `a-b` is an inclusive range.
        #[arg(long, value_parser = parse_seeds)]
        seeds: SeedList,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn parse_hdma(s: &str) -> Result<HdmaKind, String> {
    s.parse().map_err(|e: crate::hdma::UnknownHdma| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

/// Parses `1,2,5-8` into `[1, 2, 5, 6, 7, 8]`.
pub fn parse_seeds(s: &str) -> Result<SeedList, String> {
    let mut seeds = Vec::new();
    for part in s.split(',').map(str::trim) {
        let num = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("bad seed `{t}`"))
        };
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(format!("empty seed range `{part}`"));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(num(part)?),
        }
    }
    if seeds.is_empty() {
        return Err("at least one seed required".into());
    }
    Ok(SeedList(seeds))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Sim(SimError::Config(_)) => 2,
            _ => 3,
        }
    }
}

fn simulate(cfg: &ScenarioConfig, kind: HdmaKind, seed: u64, out: &Path) -> Result<RunMetrics, CliError> {
    let output = run(cfg, kind, seed)?;
    let metrics = RunMetrics::from_output(&output);
    write_run_csv(out, &output, &metrics)?;
    Ok(metrics)
}

/// Runs one strategy and returns the summary line.
pub fn cmd_run(config: &Path, kind: HdmaKind, seed: Option<u64>, out: &Path) -> Result<String, CliError> {
    let cfg = ScenarioConfig::load(config)?;
    std::fs::create_dir_all(out)?;
    let seed = seed.unwrap_or(cfg.seed);
    let m = simulate(&cfg, kind, seed, out)?;
    write_summary(out, std::slice::from_ref(&m))?;
    Ok(format!(
        "strategy={} seed={} handovers={} ping_pongs={} mean_sinr_db={} mean_throughput_bps={}",
        m.strategy,
        m.seed,
        m.handover_count,
        m.ping_pong_count,
        fmt_sig6(m.mean_sinr_db),
        fmt_sig6(m.mean_throughput_bps)
    ))
}

/// Per-strategy means over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub strategy: HdmaKind,
    pub mean_handovers: f64,
    pub mean_ping_pongs: f64,
    pub mean_sinr_db: f64,
    pub mean_throughput_bps: f64,
}

pub fn compare_rows(runs: &[RunMetrics]) -> Vec<ComparisonRow> {
    HdmaKind::ALL
        .iter()
        .filter_map(|&k| {
            let rs: Vec<_> = runs.iter().filter(|m| m.strategy == k).collect();
            if rs.is_empty() {
                return None;
            }
            let n = rs.len() as f64;
            let avg = |f: &dyn Fn(&RunMetrics) -> f64| rs.iter().map(|m| f(m)).sum::<f64>() / n;
            Some(ComparisonRow {
                strategy: k,
                mean_handovers: avg(&|m| m.handover_count as f64),
                mean_ping_pongs: avg(&|m| m.ping_pong_count as f64),
                mean_sinr_db: avg(&|m| m.mean_sinr_db),
                mean_throughput_bps: avg(&|m| m.mean_throughput_bps),
            })
        })
        .collect()
}

pub fn format_table(rows: &[ComparisonRow]) -> String {
    let mut s = format!(
        "{:<8} {:>10} {:>10} {:>14} {:>18}\n",
        "strategy", "handovers", "ping_pongs", "mean_sinr_db", "mean_tput_mbps"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<8} {:>10.2} {:>10.2} {:>14.2} {:>18.2}",
            r.strategy.name(),
            r.mean_handovers,
            r.mean_ping_pongs,
            r.mean_sinr_db,
            r.mean_throughput_bps / 1e6
        );
    }
    s
}

/// Runs every (seed, strategy) pair and returns the per-run metrics, ordered
/// by seed then strategy.
pub fn compare_runs(cfg: &ScenarioConfig, seeds: &[u64], out: &Path) -> Result<Vec<RunMetrics>, CliError> {
    let grid: Vec<(u64, HdmaKind)> = seeds
        .iter()
        .flat_map(|&s| HdmaKind::ALL.map(|k| (s, k)))
        .collect();
    let runs = grid
        .par_iter()
        .map(|&(seed, kind)| simulate(cfg, kind, seed, out))
        .collect::<Result<Vec<_>, _>>()?;
    write_summary(out, &runs)?;
    Ok(runs)
}

/// Runs the comparison grid and returns the printed table.
pub fn cmd_compare(config: &Path, seeds: &[u64], out: &Path) -> Result<String, CliError> {
    let cfg = ScenarioConfig::load(config)?;
    std::fs::create_dir_all(out)?;
    let runs = compare_runs(&cfg, seeds, out)?;
    Ok(format_table(&compare_rows(&runs)))
}

/// Parses arguments, dispatches, and maps failures onto exit codes
/// (1 usage, 2 config, 3 runtime).
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run {
            config,
            hdma,
            seed,
            out,
        } => cmd_run(config, *hdma, *seed, out),
        Command::Compare { config, seeds, out } => cmd_compare(config, &seeds.0, out),
    };
    match result {
        Ok(text) => {
            println!("{}", text.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("dcsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
