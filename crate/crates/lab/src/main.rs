use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use latticetherm_core::DimensionCap;
use latticetherm_lab::{report, run, validate, LabError, RunOptions};

#[derive(Parser)]
#[command(name = "latticetherm", version, about = "Finite-volume quantum lattice thermodynamics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSV results plus a manifest
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's `output`)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads
        #[arg(long, env = "LATTICETHERM_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
        threads: Option<u16>,
        /// Raise the Hilbert-space dimension cap (default 4096) to this value
        #[arg(long, value_name = "DIM")]
        cap_override: Option<usize>,
    },
    /// Check a config without running it
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_name = "DIM")]
        cap_override: Option<usize>,
    },
    /// Summarize a finished run from its manifest (file or output directory)
    Report {
        manifest: PathBuf,
        /// Also write the report to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), LabError> {
    match cmd {
        Command::Run { config, out, threads, cap_override } => {
            let opts = RunOptions { out, cap: cap_override.map(DimensionCap), threads: threads.map(usize::from) };
            let (dir, manifest) = run(&config, &opts)?;
            println!("{} run finished: {} files in {}", manifest.kind, manifest.outputs.len() + 1, dir.display());
        }
        Command::Validate { config, cap_override } => {
            let cfg = validate(&config, cap_override.map(DimensionCap))?;
            println!("ok: kind {} hash {}", cfg.kind, cfg.hash);
        }
        Command::Report { manifest, out } => {
            let text = report(&manifest)?;
            if let Some(p) = out {
                std::fs::write(&p, &text).map_err(|e| LabError::Io(format!("{}: {e}", p.display())))?;
            }
            print!("{text}");
        }
    }
    Ok(())
}
