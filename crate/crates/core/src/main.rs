use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use brake_index::config::{ExperimentConfig, Kind};
use brake_index::error::Error;
use brake_index::report;

/// Index computations, iteration-formula checks and brake orbit searches.
#[derive(Parser)]
#[command(name = "brake-index", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// L₀ and L₁ index pairs of linear systems.
    Index(Common),
    /// Bott-type, period-doubling, chain, bound and ε-jump checks on seeded systems.
    IterateVerify(Common),
    /// Eigenvalue counts of the Galerkin truncation against index pairs.
    GalerkinCheck(Common),
    /// Galerkin critical points of a built-in Hamiltonian.
    Solve(Common),
    /// Brake solutions for j and kj with distinctness and index certificates.
    Subharmonic(Common),
    /// Sampled audit of the structural conditions of a built-in Hamiltonian.
    Audit(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment file; its `kind` must match the subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for JSON and CSV artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integration steps per unit time.
    #[arg(long)]
    grid: Option<usize>,
    /// Galerkin truncation m.
    #[arg(long)]
    modes: Option<usize>,
    /// Built-in system name.
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    csv: bool,
}

const EXIT_MISMATCH: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::HypothesisViolation(_) | Error::InvalidDimension(_) => EXIT_CONFIG,
        Error::VerificationFailed(_) | Error::CountMismatch(_) => EXIT_MISMATCH,
        Error::Io(_) | Error::Json(_) => EXIT_IO,
        _ => EXIT_NUMERICAL,
    }
}

fn build_config(kind: Kind, c: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::new(kind),
    };
    if cfg.kind != kind {
        return Err(Error::Config(format!("config kind `{}` does not match subcommand `{}`", cfg.kind.name(), kind.name())));
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(g) = c.grid {
        cfg.numerics.grid = g;
    }
    if let Some(m) = c.modes {
        cfg.numerics.m = m;
    }
    if let Some(name) = &c.system {
        cfg.system.name = name.clone();
    }
    if let Some(dir) = &c.out {
        cfg.output.dir = Some(dir.clone());
    }
    cfg.output.json |= c.json;
    cfg.output.csv |= c.csv;
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match &cli.command {
        Command::Index(c) => (Kind::Index, c),
        Command::IterateVerify(c) => (Kind::IterateVerify, c),
        Command::GalerkinCheck(c) => (Kind::GalerkinCheck, c),
        Command::Solve(c) => (Kind::Solve, c),
        Command::Subharmonic(c) => (Kind::Subharmonic, c),
        Command::Audit(c) => (Kind::Audit, c),
    };
    let result = build_config(kind, common).and_then(|cfg| {
        let record = report::run(&cfg)?;
        let dir = cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("."));
        // with neither flag, JSON goes to stdout
        if cfg.output.json || cfg.output.csv {
            for p in report::write_artifacts(&record, &dir, cfg.output.json, cfg.output.csv)? {
                eprintln!("wrote {}", p.display());
            }
        } else {
            println!("{}", serde_json::to_string_pretty(&record)?);
        }
        Ok(record)
    });
    match result {
        Ok(record) => {
            eprintln!("{} {}: {:.1}s", record.kind.name(), if record.pass { "PASS" } else { "FAIL" }, record.wall_time_s);
            if record.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_MISMATCH)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
