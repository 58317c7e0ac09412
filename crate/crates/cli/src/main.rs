mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::config::RunConfig;

/// Spin-1 atoms in a spin-dependent hexagonal optical lattice site.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config and SDOLP_OUT_DIR).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (overrides the config and SDOLP_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for the noise-perturbed restart.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scalar potential and fictitious field maps plus radial profiles.
    Potential,
    /// Scalar and vector polarizabilities over a wavelength range.
    Polarizability,
    /// Single-atom level diagram from the radial solver.
    SingleAtom,
    /// Mean-field ground state at each configured field.
    Ground,
    /// Ground states of both sectors across the field range and the crossing field.
    Sweep,
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    cfg.apply_env()?;
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if let Some(s) = cli.seed {
        cfg.solver.seed = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = resolve(&cli)?;
    if cli.print_config {
        print!("{}", cfg.to_toml()?);
        return Ok(true);
    }
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let session = commands::Session::new(cfg)?;
    match cli.command {
        Command::Potential => commands::potential(&session),
        Command::Polarizability => commands::polarizability(&session),
        Command::SingleAtom => commands::single_atom(&session),
        Command::Ground => commands::ground(&session),
        Command::Sweep => commands::sweep(&session),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more solves did not converge");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
