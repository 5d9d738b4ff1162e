// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fss_core::Error;

mod commands;

#[derive(Debug, Parser)]
#[command(name = "fss", version, about = "Spectra of Krein strings on self-similar Cantor ladders")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Global {
    /// Ladder spec JSON; the classical Cantor ladder when omitted.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Discretization depth.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=64))]
    depth: u32,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Relative eigenvalue tolerance.
    #[arg(long, global = true, default_value_t = fss_core::string_solver::DEFAULT_REL_TOL)]
    tol: f64,
    /// Number of grid points; each command has its own default.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Atom anchor inside each cell: midpoint or barycenter.
    #[arg(long, global = true, default_value = "midpoint")]
    placement: fss_core::Placement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a spec and print it normalized.
    Validate {
        /// Exit 3 unless the spec has arithmetic structure.
        #[arg(long)]
        require_arithmetic: bool,
    },
    /// Sample the ladder function `S^depth(id)` on `[0, 1]`.
    EvalLadder,
    /// Eigenvalues of the discretized string.
    Spectrum {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Only eigenvalues below this bound.
        #[arg(long)]
        lambda_max: Option<f64>,
    },
    /// Counting function on a log-spaced lambda grid.
    Counting {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 1.0)]
        lambda_min: f64,
        /// Defaults to the trusted limit of the discretization.
        #[arg(long)]
        lambda_max: Option<f64>,
    },
    /// Run one of the self-similarity audits.
    Verify {
        #[command(subcommand)]
        audit: Audit,
    },
    /// Periodic counting profile over one period.
    Sigma {
        #[arg(long)]
        k_lo: Option<u32>,
        #[arg(long)]
        k_hi: Option<u32>,
    },
    /// Small-ball functionals along an eps grid.
    Smallball {
        /// Lowest eigenvalue index used for the profile.
        #[arg(long, default_value_t = 4)]
        n_lo: usize,
    },
    /// Compare contour quadrature of `g1hat` with its closed forms.
    FourierCheck,
}

#[derive(Debug, Clone, Args)]
struct ProblemArgs {
    /// Restrict the measure to `[a, b]`.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    interval: Option<Vec<f64>>,
    /// Robin coefficients at the two ends.
    #[arg(long, num_args = 2, value_names = ["G0", "G1"])]
    robin: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
enum Audit {
    /// Segment scaling: restricted eigenvalues against rescaled whole-string ones.
    Lemma1 {
        #[arg(long, default_value_t = 50)]
        n_max: usize,
    },
    /// Merged spectra of a split string against the whole string.
    Interlace {
        #[arg(long, num_args = 2, value_names = ["D1", "C2"], required = true)]
        split: Vec<f64>,
        #[arg(long)]
        lambda_max: Option<f64>,
    },
    /// Counting defect and `tau lambda_{2n} = lambda_n` residual.
    Renorm {
        #[arg(long, default_value_t = 20)]
        n_max: usize,
    },
    /// Block sums of log-eigenvalue differences for a split with Robin ends.
    Th51 {
        #[arg(long, num_args = 2, value_names = ["D1", "C2"], required = true)]
        split: Vec<f64>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Telescoping identity and bound for the `f_j` sequence.
    Fj {
        #[arg(long, default_value_t = 0)]
        j: usize,
    },
}

/// Failure that ends the run with a given exit code.
#[derive(Debug)]
pub enum Failure {
    Lib(Error),
    NonArithmetic(String),
    Violations(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::NonArithmetic(_) => 3,
            Failure::Violations(_) => 5,
            Failure::Lib(e) => match e.kind() {
                "overlap" | "range" | "weight" | "tolerance" | "precondition" | "domain" | "index" | "json"
                | "degenerate" => 2,
                "resolution" | "depth" => 4,
                "structure" => 5,
                _ => 1,
            },
        }
    }

    fn to_json(&self) -> serde_json::Value {
        let (kind, message, extra) = match self {
            Failure::Lib(e) => (e.kind(), e.to_string(), None),
            Failure::NonArithmetic(m) => ("non_arithmetic", m.clone(), None),
            Failure::Violations(v) => ("violation", format!("{} violation(s)", v.len()), Some(v)),
        };
        let mut err = serde_json::json!({ "kind": kind, "message": message });
        if let Some(v) = extra {
            err["violations"] = serde_json::json!(v);
        }
        serde_json::json!({ "schema": 1, "error": err })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.global, &cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        // a closed downstream pipe (`fss ... | head`) is not a failure
        Err(Failure::Lib(Error::Io(e))) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.code())
        }
    }
}
