//! Command-line front end.
//!
//! ```text
//! katolab run --config experiment.json [--out DIR] [--tol REL] [--dump-kernel]
//! katolab verify-rank-one [--nodes N] [--f-scale A] [--report-only]
//! katolab verify-rank-three [--beta B]
//! katolab conjecture scan [--config sweep.json]
//! ```
//!
//! Exit codes: 0 success, 1 a check failed, 2 invalid input or I/O failure.

pub mod config;
pub mod experiments;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{ExperimentConfig, FunctionDescriptor, GridConfig, Op, ScanConfig, SweepAxis, Which};
pub use experiments::{
    conjecture_scan, run, verify_rank_one, verify_rank_three, Check, Outcome, RankOneOptions, RankThreeOptions,
    RunOptions, ScanOptions,
};

use crate::error::Error;
use crate::spectral::DEFAULT_REL_TOL;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "katolab", version, about = "Finite-rank commutator laboratory")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Experiment or sweep config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the config's out_dir.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Relative eigenvalue threshold for rank and positivity.
    #[arg(long, global = true, default_value_t = DEFAULT_REL_TOL)]
    pub tol: f64,
    /// Worker threads.
    #[arg(long, global = true, env = "KATOLAB_THREADS")]
    pub threads: Option<usize>,
    /// Also write the weighted kernel matrix as kernel.csv.
    #[arg(long, global = true)]
    pub dump_kernel: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the ops of a config file.
    Run,
    /// The tanh / tanh(π/2·) pair.
    VerifyRankOne {
        #[arg(long, default_value_t = crate::grid::DEFAULT_NODES)]
        nodes: usize,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        f_scale: f64,
        /// Record checks without failing on them.
        #[arg(long)]
        report_only: bool,
    },
    /// The tanh / tanh(π/2·) + β tanh(π·) pair.
    VerifyRankThree {
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
    },
    /// Sweeps over mixture parameters.
    #[command(subcommand)]
    Conjecture(ConjectureCommand),
}

#[derive(Debug, Subcommand)]
pub enum ConjectureCommand {
    /// Minimum eigenvalue and strip product over a parameter sweep.
    Scan,
}

fn default_out() -> PathBuf {
    PathBuf::from("katolab-out")
}

fn dispatch(cli: Cli) -> crate::Result<Outcome> {
    let g = cli.global;
    if !(g.tol > 0.0 && g.tol < 1.0) {
        return Err(Error::param("--tol must lie in (0, 1)"));
    }
    let threads = g.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::param(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Run => {
            let path = g.config.ok_or_else(|| Error::Config("run needs --config".into()))?;
            let config = ExperimentConfig::load(&path)?;
            run(&config, &RunOptions { out_dir: g.out, rel_tol: g.tol, dump_kernel: g.dump_kernel })
        }
        Command::VerifyRankOne { nodes, f_scale, report_only } => verify_rank_one(&RankOneOptions {
            nodes,
            f_scale,
            report_only,
            rel_tol: g.tol,
            out_dir: g.out.unwrap_or_else(default_out),
        }),
        Command::VerifyRankThree { beta } => verify_rank_three(&RankThreeOptions {
            beta,
            rel_tol: g.tol,
            out_dir: g.out.unwrap_or_else(default_out),
        }),
        Command::Conjecture(ConjectureCommand::Scan) => {
            let config = match &g.config {
                Some(path) => ScanConfig::load(path)?,
                None => ScanConfig::default_sweep(),
            };
            let out_dir = g.out.or_else(|| config.out_dir.clone()).unwrap_or_else(default_out);
            conjecture_scan(&config, &ScanOptions { threads, rel_tol: g.tol, out_dir })
        }
    })
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(outcome) => {
            for check in outcome.checks.iter().filter(|c| !c.passed) {
                eprintln!("check failed: {} = {} (target {}, tolerance {})", check.name, check.value, check.target, check.tolerance);
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("katolab: {e}");
            EXIT_INVALID
        }
    }
}
