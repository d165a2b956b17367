//! `qmed`: minimum-error discrimination of quantum-state ensembles.
//!
//! Subcommands: `solve` (closed form / fixed-point oracle + certification),
//! `certify` (check a candidate POVM against an ensemble), `sweep`
//! (parameter grid over the spin-latitude family, CSV out), and `gen`
//! (write example ensemble files).
//!
//! Exit codes: 0 = success / certified optimal, 2 = ran but best-found or
//! certificate failed, 1 = error (unreadable file, invalid document,
//! dimension mismatch).

mod gen;
mod solve;
mod sweep;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "qmed", version, about = "Minimum-error discrimination of quantum-state ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Closed,
    Oracle,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an ensemble file for the optimal measurement and certify it.
    Solve {
        /// Ensemble JSON file.
        file: String,
        /// Solution strategy: closed form, oracle, or closed-then-oracle.
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
        /// Certification tolerance.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Emit exactly one JSON report on stdout; logs go to stderr.
        #[arg(long)]
        json: bool,
        /// Seed for the oracle iteration restarts.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Certify a candidate POVM file against an ensemble file.
    Certify {
        /// Ensemble JSON file.
        ensemble: String,
        /// POVM JSON file: {"dim": d, "elements": [matrix, ...]}.
        povm: String,
        /// Certification tolerance.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Sweep latitude-family parameters over a grid; one CSV row per point.
    Sweep {
        /// Template ensemble file using a latitude or spin-orbit constructor.
        template: String,
        /// Grid spec, e.g. "a=0.1,0.3,0.5;theta=0:0.2:1.4;n=2,3,4;two_j=1".
        #[arg(long)]
        grid: String,
        /// Output CSV path.
        #[arg(long)]
        out: String,
        /// Seed for the oracle iteration.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write an example ensemble file.
    Gen {
        /// Ensemble kind.
        #[arg(value_parser = ["trine", "pair", "latitude", "spin"])]
        kind: String,
        /// Purity / Bloch radius parameter.
        #[arg(long)]
        a: Option<f64>,
        /// Polar angle, radians.
        #[arg(long)]
        theta: Option<f64>,
        /// Azimuth of the seed state, radians.
        #[arg(long)]
        phi: Option<f64>,
        /// Number of states.
        #[arg(long)]
        n: Option<usize>,
        /// Twice the spin (spin kind only).
        #[arg(long = "two_j")]
        two_j: Option<u32>,
        /// Output file path.
        #[arg(long)]
        out: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    let outcome = match cli.command {
        Command::Solve {
            file,
            method,
            tol,
            json,
            seed,
        } => solve::cmd_solve(&file, method, tol, json, seed),
        Command::Certify {
            ensemble,
            povm,
            tol,
        } => solve::cmd_certify(&ensemble, &povm, tol),
        Command::Sweep {
            template,
            grid,
            out,
            seed,
        } => sweep::cmd_sweep(&template, &grid, &out, seed),
        Command::Gen {
            kind,
            a,
            theta,
            phi,
            n,
            two_j,
            out,
        } => gen::cmd_gen(&kind, a, theta, phi, n, two_j, &out),
    };

    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
