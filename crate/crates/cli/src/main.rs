mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use specmix_core::Error;

use crate::commands::Outcome;

#[derive(Parser, Debug)]
#[command(name = "specmix", version, about = "Limit spectral moments of mixed random matrices and their Monte Carlo checks")]
pub struct Cli {
    /// JSON config for the command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for the summary, data files and manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for Monte Carlo repetitions (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Turn warnings (e.g. too few Brownian steps) into config errors.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// kappa of a partition such as "{1,3}{2,4}", with its components.
    Kappa { partition: String },
    /// f_Gamma of a partition; Gamma from --config or --t.
    FGamma {
        partition: String,
        /// Shorthand for the interpolation Gamma at this time.
        #[arg(long)]
        t: Option<f64>,
    },
    /// Limit moments m_1..m_k of a law under a Gamma.
    Moments,
    /// Sample an ensemble and write its spectra.
    Simulate,
    /// Compare simulated spectra with limit moments, case by case.
    Compare,
    /// Mean resolvent of the Cauchy ensemble against (z + it)^-1.
    CauchyCheck,
    /// Moments of Brownian motion on the sphere against exact values.
    BrownianCheck,
    /// Quick run of the exact identities and invariants.
    Selftest,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Kappa { .. } => "kappa",
            Command::FGamma { .. } => "f-gamma",
            Command::Moments => "moments",
            Command::Simulate => "simulate",
            Command::Compare => "compare",
            Command::CauchyCheck => "cauchy-check",
            Command::BrownianCheck => "brownian-check",
            Command::Selftest => "selftest",
        }
    }
}

/// Failures outside the library error type.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 3,
            CliError::Lib(e) => match e {
                Error::Bounds { .. } | Error::InvalidInput(_) | Error::Parse { .. } | Error::Unsupported(_) => 3,
                Error::Degenerate(_) => 2,
                Error::Contract(_) => 4,
            },
        }
    }

    fn to_json(&self) -> serde_json::Value {
        let (kind, message) = match self {
            CliError::Config(m) => ("config", m.clone()),
            CliError::Io(m) => ("io", m.clone()),
            CliError::Lib(e) => (
                match e {
                    Error::Bounds { .. } => "bounds",
                    Error::InvalidInput(_) => "invalid_input",
                    Error::Parse { .. } => "parse",
                    Error::Contract(_) => "contract",
                    Error::Unsupported(_) => "unsupported",
                    Error::Degenerate(_) => "degenerate",
                },
                e.to_string(),
            ),
        };
        let mut v = json!({ "error": kind, "message": message, "exit_code": self.code() });
        if let CliError::Lib(Error::Parse { pos, .. }) = self {
            v["position"] = json!(pos);
        }
        v
    }
}

fn write_outputs(cli: &Cli, outcome: &Outcome) -> Result<(), CliError> {
    let summary = serde_json::to_string_pretty(&outcome.summary).expect("summary serializes");
    println!("{summary}");
    let Some(dir) = &cli.out else { return Ok(()) };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let name = cli.command.name();
    std::fs::write(dir.join(format!("{name}.json")), summary + "\n").map_err(io)?;
    for (file, body) in &outcome.files {
        std::fs::write(dir.join(file), body).map_err(io)?;
    }
    let manifest = json!({
        "command": name,
        "version": env!("CARGO_PKG_VERSION"),
        "config": outcome.resolved,
        "seed": cli.seed,
        "strict": cli.strict,
        "passed": outcome.passed,
        "files": outcome.files.iter().map(|(f, _)| f).collect::<Vec<_>>(),
    });
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")
        .map_err(io)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let outcome = commands::dispatch(cli)?;
    write_outputs(cli, &outcome)?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code())
        }
    }
}
