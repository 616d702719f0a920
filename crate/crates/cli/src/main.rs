use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use msdiff_cli::config::parse_list;
use msdiff_cli::{exit, fluxes_cmd, simulate_cmd, spectrum_cmd, verify_cmd, CliError, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "msdiff", version, about = "Maxwell-Stefan multicomponent diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Seed for property sweeps; overrides the config value.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Probe {
    /// Mole fractions, comma separated; defaults to the middle face of the initial profile.
    #[arg(long, allow_hyphen_values = true)]
    composition: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the MS matrix and the spectral-gap verdict.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        probe: Probe,
    },
    /// Fluxes from all three solution routes.
    Fluxes {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        probe: Probe,
        /// Mole-fraction gradient, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        gradient: Option<String>,
    },
    /// Run the solver and write trajectory and ledger CSVs.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the property suite for the configured mixture.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

fn overrides(seed: Option<u64>, composition: Option<&str>, gradient: Option<&str>) -> Result<Overrides, CliError> {
    Ok(Overrides {
        seed,
        composition: composition.map(parse_list).transpose()?,
        gradient: gradient.map(parse_list).transpose()?,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Spectrum { common, probe } => {
            let cfg = RunConfig::load(&common.config)?;
            spectrum_cmd(&cfg, &overrides(common.seed, probe.composition.as_deref(), None)?, &mut stdout)
        }
        Command::Fluxes { common, probe, gradient } => {
            let cfg = RunConfig::load(&common.config)?;
            let ov = overrides(common.seed, probe.composition.as_deref(), gradient.as_deref())?;
            fluxes_cmd(&cfg, &ov, &mut stdout)
        }
        Command::Simulate { common, out } => {
            let cfg = RunConfig::load(&common.config)?;
            simulate_cmd(&cfg, &overrides(common.seed, None, None)?, &out, &mut stdout).map(|_| ())
        }
        Command::Verify { common } => {
            let cfg = RunConfig::load(&common.config)?;
            verify_cmd(&cfg, &overrides(common.seed, None, None)?, &mut stdout).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("msdiff: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
