//! Command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence,
//! 4 I/O failure. `-` reads from stdin wherever a file is expected.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::dynamics::{evolve, EvolveOptions};
use crate::error::{Error, Result};
use crate::io;
use crate::kings::{self, SearchConfig};
use crate::multipoles::{multipoles, q_grid};
use crate::spin::SpinLabel;
use crate::stellar::{constellation_from_state, state_from_constellation, StellarOptions};

#[derive(Parser, Debug)]
#[command(
    name = "majorana",
    version,
    about = "Majorana stellar representation toolkit"
)]
pub struct Cli {
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Numerical tolerance: root residual bound for `stars`, zero threshold of
    /// A_M for `kings`, relative step tolerance for `evolve`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// State JSON -> constellation JSON.
    Stars {
        input: String,
        /// Emit (theta, phi) pairs instead of chart roots.
        #[arg(long)]
        angles: bool,
    },
    /// Constellation JSON -> state JSON.
    State { input: String },
    /// Husimi Q on a Gauss-Legendre x uniform grid, as CSV.
    Qgrid {
        input: String,
        #[arg(long, default_value_t = 64)]
        ntheta: usize,
        #[arg(long, default_value_t = 128)]
        nphi: usize,
    },
    /// Multipole spectrum JSON.
    Multipoles {
        input: String,
        /// Keep orders K <= M only.
        #[arg(long)]
        upto: Option<u32>,
    },
    /// Minimize A_M over constellations (without --M: find the highest
    /// order that can be made to vanish).
    Kings {
        #[arg(long = "twoS")]
        two_s: u32,
        #[arg(long = "M")]
        m: Option<u32>,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
    },
    /// Star trajectory under a Hamiltonian, as JSONL.
    Evolve {
        state: String,
        hamiltonian: String,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        dtmax: Option<f64>,
        /// Evenly spaced snapshots after t = 0; 0 writes every accepted step.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_)
        | Error::LabelMismatch(..)
        | Error::Range { .. }
        | Error::Json(_) => 2,
        Error::NonConvergence(_)
        | Error::DegenerateConstellation(_)
        | Error::StepUnderflow { .. } => 3,
        Error::Io(_) => 4,
    }
}

fn read_input(path: &str) -> Result<String> {
    let mut text = String::new();
    if path == "-" {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(path)?;
    }
    Ok(text)
}

fn tol_or(tol: Option<f64>, default: f64) -> Result<f64> {
    match tol {
        None => Ok(default),
        Some(t) if t > 0.0 && t.is_finite() => Ok(t),
        Some(t) => Err(Error::range("tol", format!("{t} must be positive"))),
    }
}

/// Runs a parsed command. The payload is returned together with an
/// exit code, so a non-converged search still reports its best result.
pub fn execute(cli: &Cli) -> Result<(String, i32)> {
    let text = match &cli.command {
        Command::Stars { input, angles } => {
            let state = io::state_from_json(&read_input(input)?)?;
            let opts = match cli.tol {
                Some(_) => StellarOptions::with_tol(tol_or(cli.tol, 0.0)?),
                None => StellarOptions::default(),
            };
            io::constellation_to_json(&constellation_from_state(&state, &opts)?, *angles) + "\n"
        }
        Command::State { input } => {
            let c = io::constellation_from_json(&read_input(input)?)?;
            io::state_to_json(&state_from_constellation(&c)) + "\n"
        }
        Command::Qgrid {
            input,
            ntheta,
            nphi,
        } => {
            let state = io::state_from_json(&read_input(input)?)?;
            io::qgrid_to_csv(&q_grid(&state, *ntheta, *nphi)?)
        }
        Command::Multipoles { input, upto } => {
            let state = io::state_from_json(&read_input(input)?)?;
            let mut spec = multipoles(&state);
            if let Some(m) = upto {
                spec = spec.truncated(*m)?;
            }
            io::spectrum_to_json(&spec) + "\n"
        }
        Command::Kings { two_s, m, restarts } => {
            let label = SpinLabel::new(*two_s);
            let zero_tol = tol_or(cli.tol, kings::DEFAULT_ZERO_TOL)?;
            let config = SearchConfig {
                m: m.unwrap_or(1),
                restarts: *restarts,
                seed: cli.seed,
                ..Default::default()
            };
            let king = match m {
                Some(_) => kings::minimize(label, &config)?,
                None => match kings::maximal_king(label, &config, zero_tol)? {
                    (_, Some(k)) => k,
                    (_, None) => kings::minimize(label, &config)?,
                },
            };
            let code = if king.converged() { 0 } else { 3 };
            return Ok((io::king_to_json(&king) + "\n", code));
        }
        Command::Evolve {
            state,
            hamiltonian,
            t,
            dtmax,
            samples,
        } => {
            let psi = io::state_from_json(&read_input(state)?)?;
            let h = io::hamiltonian_from_json(&read_input(hamiltonian)?, psi.label())?;
            let opts = EvolveOptions {
                dt_max: *dtmax,
                rtol: tol_or(cli.tol, EvolveOptions::default().rtol)?,
                samples: *samples,
                ..Default::default()
            };
            io::trajectory_to_jsonl(&evolve(&psi, &h, *t, &opts)?)
        }
    };
    Ok((text, 0))
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Parses arguments, runs, writes output and diagnostics; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = execute(&cli).and_then(|(text, code)| emit(&cli, &text).map(|_| code));
    match outcome {
        Ok(code) => {
            if code == 3 {
                eprintln!("majorana: no restart met the convergence tolerances");
            }
            code
        }
        Err(e) => {
            eprintln!("majorana: {e}");
            exit_code(&e)
        }
    }
}
