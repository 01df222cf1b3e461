mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use bellturb::DetectionMode;
use clap::{Parser, Subcommand, ValueEnum};

use commands::{Context, Format};
use config::RunConfig;

#[derive(Parser, Debug)]
#[command(
    name = "bellturb",
    version,
    about = "Bell tests through turbulent channels: figures and validation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing). Overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random draw. Overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "csv+svg")]
    format: FormatArg,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Maximal Bell parameter against cos(phi) for three contrasts.
    Fig2,
    /// Visibility against noise counts under turbulence.
    Fig3,
    /// Down-conversion source with photon-number-resolving detectors.
    Fig4,
    /// Down-conversion source with on/off detectors.
    Fig5,
    /// Compare analytical probabilities with the Fock-space oracle.
    OracleCheck,
    /// Estimate transmission moments from simulated photocounts.
    Estimate,
    /// Sweep one parameter and report Bell parameters.
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
            Command::Fig5 => "fig5",
            Command::OracleCheck => "oracle-check",
            Command::Estimate => "estimate",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum FormatArg {
    #[value(name = "csv")]
    Csv,
    #[value(name = "csv+svg")]
    CsvSvg,
}

const DEFAULT_SEED: u64 = 1;

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(exp) = &config.experiment {
        if exp != cli.command.name() {
            bail!(
                "config is for experiment `{exp}` but `{}` was requested",
                cli.command.name()
            );
        }
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.out.as_ref().map(|p| config.base_dir.join(p)))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let ctx = Context {
        config: &config,
        out_dir: &out_dir,
        seed: cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED),
        format: match cli.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::CsvSvg => Format::CsvSvg,
        },
    };
    let outcome = match cli.command {
        Command::Fig2 => commands::run_fig2(&ctx)?,
        Command::Fig3 => commands::run_fig3(&ctx)?,
        Command::Fig4 => commands::run_pdc_figure(&ctx, "fig4", DetectionMode::Pnr)?,
        Command::Fig5 => commands::run_pdc_figure(&ctx, "fig5", DetectionMode::OnOff)?,
        Command::OracleCheck => commands::run_oracle_check(&ctx)?,
        Command::Estimate => commands::run_estimate(&ctx)?,
        Command::Sweep => commands::run_sweep(&ctx)?,
    };
    for line in &outcome.summary {
        println!("{line}");
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(outcome.success)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
