use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tavis_cli::{commands, CliError, RunArgs};

/// Tavis-Cummings propagators on a truncated Fock space.
#[derive(Debug, Parser)]
#[command(name = "tavis", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    args: RunArgs,
}

#[derive(Debug, Subcommand)]
#[command(rename_all = "kebab-case")]
enum Command {
    /// Check the algebraic identities and closed forms against the spectral oracle.
    Verify,
    /// Write atomic populations, mean photon number and norm as CSV.
    Evolve,
    /// Gauss factorisation of the one-atom propagator at --t1.
    Decompose,
    /// Fit odd-power recursions A^p = D A^(p-2) and report residuals.
    RelationSearch,
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let cfg = cli.args.resolve()?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let ok = match cli.command {
        Command::Verify => commands::verify(&cfg, &mut out)?,
        Command::Evolve => commands::evolve(&cfg, &mut out)?,
        Command::Decompose => commands::decompose(&cfg, &mut out)?,
        Command::RelationSearch => commands::relation_search(&cfg, &mut out)?,
    };
    out.flush()?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
