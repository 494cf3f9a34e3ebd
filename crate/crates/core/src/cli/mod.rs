//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or config error, 3 solver failure,
//! 4 verification failure.

mod commands;
pub mod config;
pub mod record;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_oracle_check, cmd_solve, cmd_sweep, cmd_verify, CommandOutput, SweepRequest};
pub use config::RunConfig;
pub use record::{ResultRecord, SweepRow};

use crate::error::Error;
use crate::solvers::SolverKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "fracobs", version, about = "Fractional-Laplacian obstacle problems on an interval")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one problem and write the result record.
    Solve(CommonArgs),
    /// Solve and run the full verification suite.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Perturb the computed solution before verifying (negative control).
        #[arg(long)]
        inject_corruption: bool,
    },
    /// Solve along one parameter axis and write a CSV series.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// s | n | epsilon | delta (overrides [sweep].axis)
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated axis values (overrides [sweep].values)
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Compare a solver against exhaustive enumeration (n <= 14).
    OracleCheck(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    config: PathBuf,
    /// JSON output path (overrides [output].json)
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV output path (overrides [output].csv)
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// psor | pg | activeset | penalty
    #[arg(long, value_parser = ["psor", "pg", "activeset", "penalty"])]
    solver: Option<String>,
}

impl CommonArgs {
    fn load(&self) -> Result<RunConfig, Error> {
        let mut cfg = RunConfig::from_path(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(s) = &self.solver {
            cfg.solver.method = s.parse::<SolverKind>()?;
        }
        if let Some(out) = &self.out {
            cfg.output.json = Some(out.clone());
        }
        if let Some(csv) = &self.csv {
            cfg.output.csv = Some(csv.clone());
        }
        Ok(cfg)
    }
}

pub fn run_from_env() -> i32 {
    run(std::env::args_os())
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Solve(c) => c.load().map(|cfg| cmd_solve(&cfg)),
        Command::Verify { common, inject_corruption } => common.load().map(|cfg| cmd_verify(&cfg, *inject_corruption)),
        Command::Sweep { common, axis, values } => common.load().and_then(|cfg| {
            let req = SweepRequest::resolve(&cfg, axis.as_deref(), values.clone())?;
            Ok(cmd_sweep(&cfg, &req))
        }),
        Command::OracleCheck(c) => c.load().map(|cfg| cmd_oracle_check(&cfg)),
    };
    match outcome {
        Err(e) => {
            eprintln!("fracobs: {e}");
            EXIT_CONFIG
        }
        Ok(out) => match out.emit() {
            Ok(()) => out.exit_code,
            Err(e) => {
                eprintln!("fracobs: {e}");
                EXIT_CONFIG
            }
        },
    }
}
