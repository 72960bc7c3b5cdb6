//! `nhprobe`: quench runs, parameter sweeps, zero-mode extraction, probe
//! certification and closed-form oracles.
//!
//! Exit codes: 0 success, 2 configuration or argument error, 3 numerical or
//! runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nhprobe::dynamics::{jordan_oracle_state, trivial_phase_firstorder, two_level_oracle_rho};
use nhprobe::linalg::C64;
use nhprobe::sweep::{
    probe_report, run_quench, run_sweep, write_quench, write_sweep, zero_mode_report, RunConfig,
};
use nhprobe::Error;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "nhprobe",
    version,
    about = "Loschmidt-echo probes of topological phases"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one quench and write <name>.csv, <name>.json and <name>.svg.
    Quench {
        config: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
    },
    /// Run a 1D or 2D sweep and write phase.csv, phase.json and phase.svg.
    Sweep {
        config: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        /// Worker threads; sweep points run in parallel.
        #[arg(short, long, default_value_t = 1)]
        jobs: usize,
    },
    /// Extract the BdG zero-mode pair of the configured model.
    ZeroModes { config: PathBuf },
    /// Project the configured probe onto the ground cluster and certify its Jordan structure.
    ValidateProbe { config: PathBuf },
    /// Closed-form reference values as JSON.
    #[command(subcommand, allow_negative_numbers = true)]
    Oracle(Oracle),
}

#[derive(Subcommand)]
enum Oracle {
    /// Amplitudes of e^{-i(E + λJ)t} a for a single Jordan block.
    #[command(allow_negative_numbers = true)]
    Jordan {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        energy: f64,
        #[arg(long)]
        time: f64,
        /// Real parts of the initial amplitudes.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        amplitudes: Vec<f64>,
        /// Imaginary parts of the initial amplitudes (defaults to zero).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        imag: Vec<f64>,
    },
    /// Normalized ρ(t) of the randomized two-level quench.
    #[command(allow_negative_numbers = true)]
    TwoLevel {
        #[arg(long)]
        lambda: f64,
        #[arg(long = "lambda-prime")]
        lambda_prime: f64,
        #[arg(long)]
        time: f64,
    },
    /// First-order ρ(t) for a non-degenerate spectrum.
    #[command(allow_negative_numbers = true)]
    Trivial {
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        energies: Vec<f64>,
        #[arg(long)]
        lambda: f64,
        #[arg(long = "lambda-prime")]
        lambda_prime: f64,
        #[arg(long)]
        time: f64,
    },
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = if matches!(error, Error::Config(_)) {
            2
        } else {
            3
        };
        Failure { code, error }
    }
}

/// Invalid oracle parameters are argument errors, not numerical ones.
fn argument_error(error: Error) -> Failure {
    let code = if matches!(
        error,
        Error::InvalidArgument(_) | Error::SingularParameter(_) | Error::Config(_)
    ) {
        2
    } else {
        3
    };
    Failure { code, error }
}

fn print_json(value: &Value) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    // a closed pipe (e.g. `| head`) is not an error for a reporting command
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn to_value<T: serde::Serialize>(value: &T) -> Result<Value, Failure> {
    serde_json::to_value(value)
        .map_err(|e| Failure::from(Error::InvalidArgument(format!("serialization failed: {e}"))))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Quench { config, out } => {
            let cfg = RunConfig::from_path(&config)?;
            let result = run_quench(&cfg)?;
            let files = write_quench(&result, &cfg.name, &out)?;
            print_json(&json!({
                "name": cfg.name,
                "lbar": result.steady_average.map(|a| a.value),
                "window": cfg.window,
                "files": files,
            }));
        }
        Command::Sweep { config, out, jobs } => {
            let cfg = RunConfig::from_path(&config)?;
            if cfg.sweep.is_none() {
                return Err(Error::Config(format!(
                    "{}: config has no `sweep` section",
                    config.display()
                ))
                .into());
            }
            let diagram = run_sweep(&cfg, jobs)?;
            let files = write_sweep(&diagram, &out)?;
            for w in &diagram.warnings {
                eprintln!(
                    "warning: point {} ({}) failed: {}",
                    w.index, w.point, w.error
                );
            }
            let summary = diagram.classification.as_ref().map(|c| {
                json!({
                    "threshold": c.threshold,
                    "deep_points": c.deep_points,
                    "deep_agreeing": c.deep_agreeing,
                    "boundary_mismatches": c.boundary_mismatches.len(),
                })
            });
            print_json(&json!({
                "name": diagram.name,
                "points": diagram.lbar.iter().map(Vec::len).sum::<usize>(),
                "failed_points": diagram.warnings.len(),
                "classification": summary,
                "files": files,
            }));
        }
        Command::ZeroModes { config } => {
            let cfg = RunConfig::from_path(&config)?;
            print_json(&to_value(&zero_mode_report(&cfg)?)?);
        }
        Command::ValidateProbe { config } => {
            let cfg = RunConfig::from_path(&config)?;
            print_json(&to_value(&probe_report(&cfg)?)?);
        }
        Command::Oracle(oracle) => print_json(&oracle_json(oracle)?),
    }
    Ok(())
}

fn oracle_json(oracle: Oracle) -> Result<Value, Failure> {
    match oracle {
        Oracle::Jordan {
            lambda,
            energy,
            time,
            amplitudes,
            imag,
        } => {
            if !imag.is_empty() && imag.len() != amplitudes.len() {
                return Err(argument_error(Error::InvalidArgument(format!(
                    "--imag has {} entries but --amplitudes has {}",
                    imag.len(),
                    amplitudes.len()
                ))));
            }
            let a: Vec<C64> = amplitudes
                .iter()
                .enumerate()
                .map(|(k, &re)| C64::new(re, imag.get(k).copied().unwrap_or(0.0)))
                .collect();
            let state = jordan_oracle_state(&a, lambda, energy, time);
            Ok(
                json!({ "oracle": "jordan", "lambda": lambda, "energy": energy, "time": time, "state": to_value(&state)? }),
            )
        }
        Oracle::TwoLevel {
            lambda,
            lambda_prime,
            time,
        } => {
            let unnormalized =
                two_level_oracle_rho(lambda, lambda_prime, time).map_err(argument_error)?;
            let trace = unnormalized.trace().re;
            let rho = unnormalized.scale_real(1.0 / trace);
            Ok(json!({
                "oracle": "two-level",
                "lambda": lambda,
                "lambda_prime": lambda_prime,
                "time": time,
                "trace": trace,
                "rho": to_value(&rho.to_rows())?,
            }))
        }
        Oracle::Trivial {
            energies,
            lambda,
            lambda_prime,
            time,
        } => {
            let o = trivial_phase_firstorder(&energies, lambda, lambda_prime, time)
                .map_err(argument_error)?;
            Ok(json!({
                "oracle": "trivial",
                "lambda": lambda,
                "lambda_prime": lambda_prime,
                "time": time,
                "gap_ratio": o.gap_ratio,
                "warning": o.warning,
                "rho": to_value(&o.rho.to_rows())?,
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error}");
            ExitCode::from(code)
        }
    }
}
