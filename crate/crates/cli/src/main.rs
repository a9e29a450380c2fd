use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use landsberg::commands::{self, CommandError, Outcome};
use landsberg::config::{Format, RunConfig};

/// Curvature of twisted product Finsler metrics.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Every curvature tensor of the product metric at one point.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Tangent point as `x=a,b,..;y=c,d,..`; defaults to the first sample.
        #[arg(long)]
        point: Option<String>,
    },
    /// Closed-form block formulas against the oracle.
    Verify(Common),
    /// Landsberg and weakly Landsberg characterisations, and isotropy fits.
    Classify(Common),
    /// Jet derivatives against finite differences.
    Fdcheck(Common),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CommandError> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(format) = self.format {
            cfg.output.format = format;
        }
        if let Some(out) = &self.out {
            cfg.output.path = Some(out.display().to_string());
        }
        Ok(cfg)
    }
}

fn run(cli: &Cli) -> Result<Outcome, CommandError> {
    let (common, name) = match &cli.command {
        Command::Eval { common, .. } => (common, "eval"),
        Command::Verify(c) => (c, "verify"),
        Command::Classify(c) => (c, "classify"),
        Command::Fdcheck(c) => (c, "fdcheck"),
    };
    let cfg = common.load()?;
    let start = Instant::now();
    let outcome = match &cli.command {
        Command::Eval { point, .. } => commands::eval(&cfg, point.as_deref())?,
        Command::Verify(_) => commands::verify(&cfg)?,
        Command::Classify(_) => commands::classify(&cfg)?,
        Command::Fdcheck(_) => commands::fdcheck(&cfg)?,
    };
    let elapsed = start.elapsed();
    let text = outcome
        .report
        .render(cfg.output.format)
        .map_err(|e| CommandError::Domain(e.to_string()))?;
    match &cfg.output.path {
        Some(path) => std::fs::write(path, text).map_err(|source| CommandError::Output {
            path: path.clone(),
            source,
        })?,
        None => print!("{text}"),
    }
    eprintln!("{name}: {:.3} s", elapsed.as_secs_f64());
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if outcome.refuted {
                eprintln!("refuted: see report");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
