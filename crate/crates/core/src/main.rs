use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use omc_core::cli::{cmd_bands, cmd_cascade, cmd_defect, cmd_sweep, Domain, OutputSet, Sink};
use omc_core::config::RunConfig;
use omc_core::Result;

/// Band structures, defect modes and cascade efficiencies of shamrock
/// opto-mechanical crystals.
#[derive(Parser)]
#[command(name = "omc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Only print errors.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Bulk band structure and band gaps.
    Bands {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "photonic")]
        domain: Domain,
    },
    /// Waveguide bands and heterostructure cavity modes.
    Defect {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "photonic")]
        domain: Domain,
    },
    /// Photon-phonon cascade efficiency.
    Cascade {
        #[command(flatten)]
        common: Common,
    },
    /// Repeat a command over the values in the config's sweep block.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "photonic")]
        domain: Domain,
    },
}

fn run(cli: Cli) -> Result<()> {
    let (common, domain) = match &cli.command {
        Command::Bands { common, domain } | Command::Defect { common, domain } | Command::Sweep { common, domain } => {
            (common, *domain)
        }
        Command::Cascade { common } => (common, Domain::Photonic),
    };
    let (config, text) = RunConfig::load(&common.config)?;
    let mut out = OutputSet::new(&common.out)?;
    let summary = match &cli.command {
        Command::Bands { .. } => cmd_bands(&config, domain, &mut out)?,
        Command::Defect { .. } => cmd_defect(&config, domain, &mut out)?,
        Command::Cascade { .. } => cmd_cascade(&config, &mut out)?,
        Command::Sweep { .. } => {
            let raw = serde_json::from_str(&text).map_err(|e| omc_core::Error::Config(e.to_string()))?;
            cmd_sweep(&raw, domain, &mut out)?
        }
    };
    out.write("config.json", text)?;
    let files = out.commit(&common.out)?;
    for f in &summary.metrics {
        log::info!("{} = {}", f.0, f.1);
    }
    log::info!("wrote {} files to {}", files.len(), common.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
