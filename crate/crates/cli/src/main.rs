use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use squeezelab::config::{Experiment, Overrides};
use squeezelab::{execute, EXIT_ASSERTION, EXIT_INVALID, EXIT_OK};

/// Raman-coupled two-mode condensate experiments: spectra, evolution,
/// fractional revivals, adiabatic elimination and the single-mode bound.
#[derive(Parser)]
#[command(name = "squeezelab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rotated effective Hamiltonian diagonal against the closed-form levels
    Spectrum(RunArgs),
    /// Exact two-mode evolution: populations, sector weights, entropy
    Evolve(RunArgs),
    /// Fidelity with the Gauss-sum superposition over a tau grid
    Revival(RunArgs),
    /// Three-mode vs eliminated two-mode evolution across detunings
    Adiabatic(RunArgs),
    /// Single-mode bound on the atom number
    Validity(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration document
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output_dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-mode Fock cutoff (overrides cutoff)
    #[arg(long)]
    cutoff: Option<usize>,
    /// Suppress the summary on stdout
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Spectrum(a) => (Experiment::Spectrum, a),
        Command::Evolve(a) => (Experiment::Evolve, a),
        Command::Revival(a) => (Experiment::Revival, a),
        Command::Adiabatic(a) => (Experiment::Adiabatic, a),
        Command::Validity(a) => (Experiment::Validity, a),
    };
    let overrides = Overrides { experiment: Some(experiment), cutoff: args.cutoff, output_dir: args.out };

    let (cfg, report) = match execute(&args.config, &overrides) {
        Ok(done) => done,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };

    if !args.quiet {
        for line in &report.summary {
            println!("{line}");
        }
        println!("wrote {} file(s) to {}", report.tables.len() + 1, cfg.output_dir.display());
    }
    let failures: Vec<_> = report.failures().collect();
    if failures.is_empty() {
        return ExitCode::from(EXIT_OK);
    }
    eprintln!("{} assertion(s) failed:", failures.len());
    for a in failures {
        eprintln!("  {}: {}", a.name, a.detail);
    }
    ExitCode::from(EXIT_ASSERTION)
}
