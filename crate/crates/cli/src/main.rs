use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use indexscope_cli::{run, Command, RunConfig};

#[derive(Parser)]
#[command(
    name = "indexscope",
    version,
    about = "Correlation spectra, networks and multifractality of index panels"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Base seed (overrides `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Run one named period only (`full` is the whole sample).
    #[arg(long, global = true)]
    period: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Load and align the price panel.
    Ingest,
    /// Sliding-window spectra and Marchenko–Pastur comparison.
    Rmt,
    /// Threshold networks and minimum spanning trees.
    Network,
    /// MF-DFA with shuffled and IAAFT baselines and BMFM fit.
    Mfdfa,
    /// Generate the synthetic panel and run every stage on it.
    Demo,
    /// Run every stage on the configured input.
    Report,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Ingest => Command::Ingest,
            Cmd::Rmt => Command::Rmt,
            Cmd::Network => Command::Network,
            Cmd::Mfdfa => Command::Mfdfa,
            Cmd::Demo => Command::Demo,
            Cmd::Report => Command::Report,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = (|| {
        let mut cfg = match &cli.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(out) = &cli.out {
            cfg.output = out.clone();
        }
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        run(cli.command.into(), &cfg, cli.period.as_deref()).map(|m| (cfg.output, m))
    })();
    match result {
        Ok((dir, manifest)) => {
            println!(
                "{}: {} artifacts in {} (config {})",
                manifest.command,
                manifest.artifacts.len(),
                dir.display(),
                &manifest.config_hash[..12]
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
