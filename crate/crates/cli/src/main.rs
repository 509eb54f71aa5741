use clap::{Parser, Subcommand};
use landau::diagnostics::Verdict;
use landau_cli::commands::{self, CliError};
use landau_cli::config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

/// Landau relaxation laboratory: kernel checks, spectral gaps, linear and
/// nonlinear evolutions and decay fits.
#[derive(Parser, Debug)]
#[command(name = "landau", version, about)]
struct Cli {
    /// TOML run configuration; defaults apply to every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized checks (overrides `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use n = 12 grids throughout.
    #[arg(long, global = true)]
    quick: bool,
    /// Print the default configuration and exit.
    #[arg(long)]
    dump_defaults: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Probe tables for J_alpha, ell1/ell2, the convolved fields and phi.
    KernelCheck,
    /// Dense spectrum of the linearised operator.
    Spectrum,
    /// Nonlinear evolution from the configured initial datum.
    Evolve,
    /// Certified (M, R) split and the hypo-dissipativity envelope.
    Dissipativity,
    /// Exponential fit of an evolve trace against the spectral gap.
    DecayFit,
    /// The full acceptance suite.
    VerifyAll,
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if cli.quick {
        cfg = cfg.quick();
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Verdict, CliError> {
    if cli.dump_defaults {
        let cfg = if cli.quick { RunConfig::default().quick() } else { RunConfig::default() };
        print!("{}", cfg.dump());
        return Ok(Verdict::Pass);
    }
    let Some(command) = cli.command else {
        return Err(CliError::Config("no subcommand given; see --help".into()));
    };
    let cfg = resolve(cli)?;
    match command {
        Command::KernelCheck => commands::kernel_check(&cfg),
        Command::Spectrum => commands::spectrum(&cfg),
        Command::Evolve => commands::evolve(&cfg),
        Command::Dissipativity => commands::dissipativity(&cfg),
        Command::DecayFit => commands::decay_fit(&cfg),
        Command::VerifyAll => commands::verify_all(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(v) => {
            eprintln!("verification verdict: {v:?}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
