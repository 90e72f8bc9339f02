use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use vlp_cli::config::{ExperimentConfig, ExperimentKind};
use vlp_cli::{experiments, io};

/// Batch simulation CLI for VLC receiver localization experiments.
#[derive(Parser)]
#[command(name = "vlp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's trial count.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// RMSE sweep along Path 1 (x = y = 2 m, sweep z).
    Path1(CommonArgs),
    /// RMSE sweep along Path 2 (y = 1 m, z = 1.5 m, sweep x).
    Path2(CommonArgs),
    /// Convergence probability versus RRC cluster count.
    Convergence(CommonArgs),
    /// CRLB coverage versus the VAP ceiling angle.
    CoverageCeiling(CommonArgs),
    /// CRLB coverage versus the LED polar angle.
    CoveragePolar(CommonArgs),
    /// CRLB over the full room grid (CSV plus JSON summary).
    CrlbGrid(CommonArgs),
    /// Localize from an externally supplied RSS observation vector.
    Localize {
        #[command(flatten)]
        common: CommonArgs,
        /// JSON file holding {"s": [..]} with one entry per LED.
        #[arg(long)]
        observation: PathBuf,
    },
}

fn load_config(args: &CommonArgs, kind: ExperimentKind) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if cfg.experiment.kind != kind {
        anyhow::bail!(
            "config declares kind {:?} but the subcommand expects {:?}",
            cfg.experiment.kind,
            kind
        );
    }
    if let Some(seed) = args.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.experiment.trials = trials;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn run_path(args: &CommonArgs, kind: ExperimentKind) -> anyhow::Result<()> {
    let cfg = load_config(args, kind)?;
    let rows = experiments::run_path_experiment(&cfg)?;
    io::write_output(args.out.as_deref(), &io::path_csv(&rows))
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Path1(args) => run_path(&args, ExperimentKind::Path1)?,
        Command::Path2(args) => run_path(&args, ExperimentKind::Path2)?,
        Command::Convergence(args) => {
            let cfg = load_config(&args, ExperimentKind::Convergence)?;
            let rows = experiments::run_convergence_experiment(&cfg)?;
            io::write_output(args.out.as_deref(), &io::convergence_csv(&rows))?;
        }
        Command::CoverageCeiling(args) => {
            let cfg = load_config(&args, ExperimentKind::CoverageCeiling)?;
            let rows = experiments::run_coverage_sweep(&cfg)?;
            io::write_output(args.out.as_deref(), &io::coverage_csv(&rows))?;
        }
        Command::CoveragePolar(args) => {
            let cfg = load_config(&args, ExperimentKind::CoveragePolar)?;
            let rows = experiments::run_coverage_sweep(&cfg)?;
            io::write_output(args.out.as_deref(), &io::coverage_csv(&rows))?;
        }
        Command::CrlbGrid(args) => {
            let cfg = load_config(&args, ExperimentKind::CrlbGrid)?;
            let report = experiments::run_crlb_grid(&cfg)?;
            io::write_output(args.out.as_deref(), &io::crlb_grid_csv(&report))?;
            if let Some(out) = &args.out {
                let summary_path = out.with_extension("json");
                std::fs::write(&summary_path, io::crlb_summary_json(&report)?)?;
            } else {
                io::write_output(None, &io::crlb_summary_json(&report)?)?;
            }
        }
        Command::Localize {
            common,
            observation,
        } => {
            let cfg = load_config(&common, ExperimentKind::LocalizeOnce)?;
            let text = std::fs::read_to_string(&observation)
                .with_context(|| format!("reading observation {}", observation.display()))?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let s: Vec<f64> = value
                .get("s")
                .and_then(|v| v.as_array())
                .context("observation file must contain an \"s\" array")?
                .iter()
                .map(|v| v.as_f64().context("observation entries must be numbers"))
                .collect::<anyhow::Result<_>>()?;
            let output = experiments::localize_once(&cfg, s)?;
            io::write_output(common.out.as_deref(), &io::localize_json(&output)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
