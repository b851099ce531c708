//! `muskat2i` command-line front end.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::{Format, Sink};

#[derive(Parser, Debug)]
#[command(name = "muskat2i", version, about = "Two-interface Muskat problem: dispersion, evolution and finger equilibria")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file.
    #[arg(short, long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a configuration entry, e.g. `gamma_w=0.5` or `discretization.n_modes=16`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write `<PREFIX>.csv|json` and `<PREFIX>.summary.json` instead of stdout/stderr.
    #[arg(short, long, global = true, value_name = "PREFIX")]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Multiplier symbols and eigenvalues for m = 0..=m_max.
    Dispersion {
        #[arg(long, default_value_t = 32)]
        m_max: usize,
    },
    /// Parabolicity conditions for the potential c.
    RtCheck {
        /// Defaults to the boundary value of the configuration.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Stability report of the flat state.
    Spectrum {
        #[arg(long, default_value_t = muskat2i::spectrum::DEFAULT_M_MAX)]
        m_max: usize,
    },
    /// Height of a flat interface driven by the boundary potential.
    FlatOde {
        /// Defaults to the mean of the configured initial f.
        #[arg(long)]
        f0: Option<f64>,
        /// Defaults to discretization.t_end.
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Nonlinear evolution from the configured initial interfaces.
    Simulate,
    /// Continuation of the l-th finger branch.
    Equilibria {
        #[arg(long = "mode", default_value_t = 1)]
        l: usize,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        eps_max: f64,
        #[arg(long, default_value_t = 0.02)]
        step: f64,
        /// Initial number of cosine modes; refined automatically.
        #[arg(long, default_value_t = muskat2i::equilibria::DEFAULT_COEFFS)]
        n_coeffs: usize,
    },
    /// Configuration check, optionally with the linearisation test of Φ.
    Validate {
        #[arg(long)]
        linearization: bool,
        #[arg(long, default_value_t = 8)]
        m_max: usize,
    },
}

pub enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<muskat2i::Error> for Failure {
    fn from(e: muskat2i::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("MUSKAT2I_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| Failure::Usage(format!("MUSKAT2I_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let path = cli
        .common
        .config
        .ok_or_else(|| Failure::Usage("a configuration file is required (--config PATH)".into()))?;
    let config = muskat2i::Config::from_path(&path, &cli.common.overrides)?;
    let sink = Sink {
        prefix: cli.common.output,
        format: cli.common.format,
    };
    match cli.command {
        Command::Dispersion { m_max } => commands::dispersion(&config, m_max, &sink),
        Command::RtCheck { c } => commands::rt_check(&config, c, &sink),
        Command::Spectrum { m_max } => commands::spectrum(&config, m_max, &sink),
        Command::FlatOde { f0, t_end, samples } => commands::flat_ode(&config, f0, t_end, samples, &sink),
        Command::Simulate => commands::simulate(&config, &sink),
        Command::Equilibria {
            l,
            eps_max,
            step,
            n_coeffs,
        } => commands::equilibria(&config, l, eps_max, step, n_coeffs, &sink),
        Command::Validate { linearization, m_max } => commands::validate(&config, linearization, m_max, &sink),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
