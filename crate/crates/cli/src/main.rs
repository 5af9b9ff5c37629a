//! `freemult`: free multiplicative convolution tools on the command line.
//!
//! Exit codes: 0 success, 1 numerical failure or failed check, 2 invalid input.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "freemult", version, about = "Free multiplicative convolution and limit theorems for triangular arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Io {
    /// input JSON file (repeat for commands taking two measures)
    #[arg(short, long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    /// output file; `.csv` selects the table format where available
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// moments of μ ⊠ ν (series and, up to order 8, partition oracle) and μ ⊛ ν
    Convolve {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 6)]
        order: usize,
    },
    /// evaluate an infinitely divisible law from its parameters
    Idlaw {
        #[command(flatten)]
        io: Io,
        /// number of points on the default half-line grid
        #[arg(long, default_value_t = freemult::measure::DEFAULT_GRID_POINTS)]
        grid: usize,
        #[arg(long, default_value_t = 8)]
        order: usize,
    },
    /// per-row diagnostics of a triangular array and a limit verdict
    Diagnose {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        array: ArrayArgs,
    },
    /// compare row products with the predicted limit laws
    Verify {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        array: ArrayArgs,
        #[arg(long, value_enum, default_value_t = Check::Auto)]
        check: Check,
        #[arg(long, default_value_t = freemult::measure::DEFAULT_GRID_POINTS)]
        grid: usize,
        #[arg(long, default_value_t = freemult::verify::DEFAULT_CIRCLE_ORDER)]
        order: usize,
    },
    /// random-matrix estimate of the moments of μ ⊠ ν
    Mc {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 512)]
        dim: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 4)]
        order: usize,
    },
}

#[derive(clap::Args, Debug, Clone)]
pub struct ArrayArgs {
    /// comma-separated row indices, e.g. "1e2,1e3,1e4"
    #[arg(long)]
    pub rows: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    /// half-line or circle theorem check, from the array's space
    Auto,
    Pos,
    Circ,
    Haar,
    Classical,
}

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numerical(String),
}

impl From<freemult::Error> for Failure {
    fn from(e: freemult::Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("FREEMULT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Validation(format!("FREEMULT_THREADS={v} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Numerical(e.to_string()))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    configure_threads()?;
    match cli.command {
        Command::Convolve { io, order } => commands::convolve(&io, order),
        Command::Idlaw { io, grid, order } => commands::idlaw(&io, grid, order),
        Command::Diagnose { io, array } => commands::diagnose(&io, &array),
        Command::Verify {
            io,
            array,
            check,
            grid,
            order,
        } => commands::verify(&io, &array, check, grid, order),
        Command::Mc {
            io,
            seed,
            dim,
            samples,
            order,
        } => commands::mc(&io, freemult::mc::McConfig::new(dim, samples, seed).with_order(order)),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("invalid input: {msg}");
            ExitCode::from(2)
        }
    }
}
