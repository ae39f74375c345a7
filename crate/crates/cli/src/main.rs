use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use privauction_cli::commands;
use privauction_cli::config::{ExperimentConfig, Format};

/// Run and verify privacy-purchasing auctions from a JSON experiment config.
#[derive(Parser)]
#[command(name = "privauction", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured instance and check its outcome.
    Run(Overrides),
    /// Run the property suite over a seeded corpus.
    Verify(Overrides),
    /// Simulate once per value of the configured sweep parameter.
    Sweep(Overrides),
}

#[derive(Args)]
struct Overrides {
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Clamp estimates to [0, n] before measuring error.
    #[arg(long)]
    clamp: bool,
}

const EXIT_PROPERTY_FAILURE: u8 = 1;
const EXIT_INPUT_ERROR: u8 = 2;

fn load(o: &Overrides) -> Result<ExperimentConfig, String> {
    let source = std::fs::read_to_string(&o.config)
        .map_err(|e| format!("cannot read {}: {e}", o.config.display()))?;
    let mut cfg =
        ExperimentConfig::parse(&source).map_err(|e| format!("{}: {e}", o.config.display()))?;
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = o.trials {
        cfg.trials = trials;
    }
    if let Some(path) = &o.output {
        cfg.output.path = Some(path.clone());
    }
    if let Some(format) = o.format {
        cfg.output.format = format;
    }
    cfg.clamp_estimates |= o.clamp;
    cfg.validate(Some(&source))
        .map_err(|e| format!("{}: {e}", o.config.display()))?;
    Ok(cfg)
}

fn emit(
    path: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>,
) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            let mut out = BufWriter::new(File::create(p)?);
            write(&mut out)?;
            out.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            write(&mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), String> {
    if let Ok(raw) = std::env::var("PRIVAUCTION_THREADS") {
        let threads: usize = raw
            .parse()
            .map_err(|_| format!("PRIVAUCTION_THREADS must be a thread count, got `{raw}`"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn execute(command: Command) -> Result<bool, (u8, String)> {
    let input = |e: String| (EXIT_INPUT_ERROR, e);
    configure_threads().map_err(input)?;
    let overrides = match &command {
        Command::Run(o) | Command::Verify(o) | Command::Sweep(o) => o,
    };
    let cfg = load(overrides).map_err(input)?;
    let path = cfg.output.path.as_deref();
    let format = cfg.output.format;
    let written = |r: anyhow::Result<()>| r.map_err(|e| input(format!("cannot write report: {e}")));
    match command {
        Command::Run(_) => {
            let report = commands::run(&cfg).map_err(|e| input(e.to_string()))?;
            written(emit(path, |out| report.write(format, out)))?;
            Ok(report.passed())
        }
        Command::Verify(_) => {
            let report = commands::verify(&cfg).map_err(|e| input(e.to_string()))?;
            written(emit(path, |out| report.write(format, out)))?;
            Ok(report.passed())
        }
        Command::Sweep(_) => {
            if cfg.sweep.is_none() {
                return Err(input(
                    "sweep requires a `sweep` section in the config".into(),
                ));
            }
            let report = commands::sweep(&cfg);
            written(emit(path, |out| report.write(format, out)))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more property checks failed");
            ExitCode::from(EXIT_PROPERTY_FAILURE)
        }
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
