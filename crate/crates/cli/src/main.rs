use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use anisotrap_cli::commands::{self, Outcome};
use anisotrap_cli::config::{RawConfig, RunConfig};
use anisotrap_cli::error::CliResult;
use anisotrap_cli::output::render;
use anisotrap_cli::sweep::{self, SweepOptions, SweepOutcome};

/// Geometric phases of a trapped ion in an anisotropic Paul trap.
#[derive(Parser)]
#[command(name = "anisotrap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: PathBuf,
    /// Output format; overrides the `format` key.
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Output file; stdout when absent. Overrides the `out` key.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key=value`, applied after the file. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Singlet energies, analytic against numeric.
    Spectrum(Common),
    /// Berry phases: closed form, connection integral, Wilson loop.
    Berry(Common),
    /// One cycle with each propagation method.
    Evolve(Common),
    /// The sign-flip protocol against the isotropic reference.
    Experiment(Common),
    /// Experiment grid over dnu/lambda, N and theta.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Continue from `<out>.journal`, keeping completed rows.
        #[arg(long)]
        resume: bool,
        /// Stop after this many new grid points, leaving the journal.
        #[arg(long, value_name = "POINTS")]
        stop_after: Option<usize>,
    },
}

fn load(common: &Common) -> CliResult<RunConfig> {
    let mut raw = RawConfig::load(&common.config)?;
    for o in &common.overrides {
        raw.apply_override(o)?;
    }
    if let Some(f) = &common.format {
        raw.set("format", f)?;
    }
    if let Some(out) = &common.out {
        raw.set("out", &out.to_string_lossy())?;
    }
    RunConfig::resolve(raw)
}

fn emit(cfg: &RunConfig, text: &str) -> CliResult<()> {
    match &cfg.out {
        Some(path) => {
            let tmp = path.with_extension("tmp");
            std::fs::write(&tmp, text)?;
            std::fs::rename(&tmp, path)?;
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn warn(lines: &[String]) {
    for w in lines {
        eprintln!("warning: {w}");
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let (name, common) = match &cli.command {
        Command::Spectrum(c) => ("spectrum", c),
        Command::Berry(c) => ("berry", c),
        Command::Evolve(c) => ("evolve", c),
        Command::Experiment(c) => ("experiment", c),
        Command::Sweep { common, .. } => ("sweep", common),
    };
    let cfg = load(common)?;

    if let Command::Sweep { resume, stop_after, .. } = cli.command {
        return match sweep::run(&cfg, &SweepOptions { resume, stop_after })? {
            SweepOutcome::Complete(text) => {
                emit(&cfg, &text)?;
                sweep::finish(&cfg)
            }
            SweepOutcome::Interrupted { completed, total } => {
                eprintln!("sweep stopped with {completed} of {total} points; rerun with --resume");
                Ok(())
            }
        };
    }

    let Outcome { table, warnings } = match name {
        "spectrum" => commands::spectrum(&cfg)?,
        "berry" => commands::berry(&cfg)?,
        "evolve" => commands::evolve(&cfg)?,
        _ => commands::experiment(&cfg)?,
    };
    warn(&warnings);
    emit(&cfg, &render(name, &table, cfg.format, cfg.precision))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
