use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod builtin;
mod output;
mod run;

use run::{Check, Status};

#[derive(Debug, Parser)]
#[command(
    name = "qclassical",
    version,
    about = "Classicality, incoherence and Markovianity checks for multi-time quantum processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run checkers on a process document or a built-in model.
    Check {
        /// Path to a process JSON document, or one of `counterexample-1`,
        /// `counterexample-2`, `counterexample-3`, `appendix-a`.
        #[arg(long)]
        input: String,
        #[command(flatten)]
        common: Common,
    },
    /// Check one of the built-in counterexamples, optionally exporting it as
    /// a process document.
    Counterexample {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
        /// Write the process document here.
        #[arg(long)]
        export: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Write the dephasing model's trajectory with and without the
    /// intermediate measurement as CSV.
    DephasingModel {
        #[arg(long, default_value_t = 1.0)]
        g: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        x0: f64,
        #[arg(long, default_value_t = 5.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Search random instances for violations of the implications between
    /// the checks.
    Fuzz {
        #[arg(long)]
        seed: u64,
        /// Instances per class.
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9, value_parser = positive)]
    tolerance: f64,
    /// Comma-separated subset of classical, incoherent, ncgd, invertible,
    /// eq12, pipeline.
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<Check>>,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(x) => Err(format!("must be a finite number > 0, got {x}")),
        Err(e) => Err(e.to_string()),
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("QCLASSICAL_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("QCLASSICAL_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return Status::InputError.into();
    }
    let result = match cli.command {
        Command::Check { input, common } => run::check(&input, &common.into()),
        Command::Counterexample {
            which,
            export,
            common,
        } => run::counterexample(which as usize, export.as_deref(), &common.into()),
        Command::DephasingModel {
            g,
            gamma,
            s,
            x0,
            t_max,
            dt,
            output,
        } => run::dephasing_model(g, gamma, s, x0, t_max, dt, output.as_deref()),
        Command::Fuzz {
            seed,
            count,
            common,
        } => run::fuzz(seed, count, &common.into()),
    };
    match result {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e}");
            Status::InputError.into()
        }
    }
}

impl From<Common> for run::Options {
    fn from(c: Common) -> Self {
        run::Options {
            output: c.output,
            tolerance: c.tolerance,
            checks: c.checks,
        }
    }
}
