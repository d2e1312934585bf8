use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bloch_series::io::{parse_config, run_command, Command};

#[derive(Parser)]
#[command(name = "bloch", version, about = "Bloch-wave power series for high-contrast periodic media")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Paths {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Sub {
    /// Build the cell mesh and export it as text.
    Mesh(Paths),
    /// Dirichlet spectrum of the inclusion.
    Spectrum(Paths),
    /// Sampled homogenized dispersion relation and band diagram.
    Dispersion(Paths),
    /// Series coefficients and their norms.
    Series(Paths),
    /// Majorants, constants and radius estimates.
    Bounds(Paths),
    /// Series against the direct finite-η solve.
    Validate(Paths),
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, paths) = match cli.command {
        Sub::Mesh(p) => (Command::Mesh, p),
        Sub::Spectrum(p) => (Command::Spectrum, p),
        Sub::Dispersion(p) => (Command::Dispersion, p),
        Sub::Series(p) => (Command::Series, p),
        Sub::Bounds(p) => (Command::Bounds, p),
        Sub::Validate(p) => (Command::Validate, p),
    };
    let text = match std::fs::read_to_string(&paths.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", paths.config.display());
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let Some(out) = paths.out.or_else(|| cfg.out.clone()) else {
        eprintln!("error: no output directory: pass --out or set `out` in the configuration");
        return ExitCode::from(EXIT_VALIDATION);
    };
    match run_command(cmd, &cfg, &out) {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{} failed: {e}", cmd.name());
            if e.is_validation() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::from(EXIT_NUMERICAL)
            }
        }
    }
}
