//! `capdesign`: batch runs for composite absorbing potentials.

mod config;
mod error;
mod files;
mod run;

use clap::{Parser, Subcommand};
use config::Mode;
use error::CliError;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "capdesign", version, about = "Design and evaluate complex absorbing potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Random seed for the optimizer's starts.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Slices per unit length.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Print nothing on success.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Build a perfectly absorbing composite by polynomial inversion.
    Invert,
    /// Optimise N equal-width complex square barriers.
    Optimize,
    /// Optimise the strength of a −iηx² absorber.
    Baseline,
    /// Re-evaluate a profile or heights file written earlier.
    Scan,
}

impl From<Command> for Mode {
    fn from(c: Command) -> Mode {
        match c {
            Command::Invert => Mode::Invert,
            Command::Optimize => Mode::Optimize,
            Command::Baseline => Mode::Baseline,
            Command::Scan => Mode::Scan,
        }
    }
}

fn execute(cli: &Cli) -> Result<Vec<String>, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = config::load(path)?;
    let base_dir = path.parent().unwrap_or(Path::new("."));
    let overrides = run::Overrides {
        seed: cli.seed,
        resolution: cli.resolution,
    };
    let outcome = run::run(cli.command.into(), &cfg, base_dir, overrides)?;

    std::fs::create_dir_all(&cli.out_dir)
        .map_err(|e| CliError::Output(format!("{}: {e}", cli.out_dir.display())))?;
    let mut lines = outcome.report;
    for (name, bytes) in &outcome.files {
        let target = cli.out_dir.join(name);
        files::write_atomic(&target, bytes)?;
        lines.push(format!("wrote {}", target.display()));
    }
    Ok(lines)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(lines) => {
            if !cli.quiet {
                for line in lines {
                    println!("{line}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("capdesign: {e}");
            e.exit_code()
        }
    }
}
