use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rehearsal_cli::config::Suite;
use rehearsal_cli::output::resolve_out_dir;
use rehearsal_cli::{cmd_simulate, cmd_sweep, cmd_theory, cmd_verify, CliError, Format, RunConfig};

/// Rehearsal strategies in overparameterized linear continual learning.
#[derive(Parser)]
#[command(name = "rehearsal", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; omitted keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides run.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trial count (overrides run.trials, or verify.identity_trials for verify).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads (overrides run.workers).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory; defaults to $REHEARSAL_OUT_ROOT/<command>.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// What to print on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Expected forgetting and generalization error plus coefficient tables.
    Theory,
    /// Monte Carlo estimates with standard errors next to theory.
    Simulate,
    /// Parameter sweep with CSV, JSON, SVG and gnuplot output.
    Sweep,
    /// Numeric checks; exits 4 when an asserted check fails.
    Verify {
        /// Defaults to verify.suite from the config.
        #[arg(value_enum)]
        suite: Option<Suite>,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let name = match cli.command {
        Command::Theory => "theory",
        Command::Simulate => "simulate",
        Command::Sweep => "sweep",
        Command::Verify { .. } => "verify",
    };
    if let Some(s) = c.seed {
        cfg.run.seed = s;
    }
    if let Some(t) = c.trials {
        if name == "verify" {
            cfg.verify.identity_trials = t;
        } else {
            cfg.run.trials = t;
        }
    }
    if let Some(w) = c.workers {
        cfg.run.workers = Some(w);
    }
    if let Command::Verify { suite: Some(s) } = cli.command {
        cfg.verify.suite = s;
    }
    let out = resolve_out_dir(c.out.as_deref(), name);
    let outcome = match cli.command {
        Command::Theory => cmd_theory(&cfg, out, c.format)?,
        Command::Simulate => cmd_simulate(&cfg, out, c.format)?,
        Command::Sweep => cmd_sweep(&cfg, out, c.format)?,
        Command::Verify { .. } => cmd_verify(&cfg, cfg.verify.suite, out, c.format)?,
    };
    print!("{}", outcome.stdout);
    Ok(outcome.ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
