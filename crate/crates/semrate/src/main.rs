use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use semrate::cli::{
    cmd_frontier, cmd_simulate, cmd_sweep, cmd_validate, report_validation, CliError, EXIT_OK,
    EXIT_VALIDATION,
};
use semrate::config::{ResolvedConfig, RunConfigFile};

const CONFIG_HELP: &str = "\
CONFIG FILE (TOML):
  [actions]      latent_dims = [10, 15, 20]
  [error_model]  one of: table = \"curve.csv\" (header `n,p_e`)
                 or synthetic = { floor, ceil, scale }
  [sim]          horizon, seed; optional warmup (default horizon/10),
                 instability_backlog_cap (default 1000000),
                 replications (default 5)
  [sweep]        lambda = [..], epsilon = [..];
                 optional v_grid (default: 0 plus 17 log points in [1e-2, 1e6]),
                 objective = \"delay\" | \"aoi\" (default delay)
  [[policy]]     spec = \"fixed:<n>\" | \"dpp-queue\" | \"dpp-aoi\";
                 optional v (default 0), estimator = \"oracle\" | \"empirical\"

See config.example in the repository root for an annotated file.

EXIT CODES: 0 success, 2 config error, 3 validation failure.";

#[derive(Parser)]
#[command(name = "semrate", version, after_help = CONFIG_HELP)]
/// Semantic-rate control simulator: adaptive latent-dimension selection on a
/// single-server link under a long-term semantic error cap.
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to the TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV output
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the config's master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for grid cells (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one (lambda, epsilon, policy, v, seed) cell and write metrics.csv
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also dump trace.csv (event trace) and ledger.csv (per-update rows)
        #[arg(long)]
        trace: bool,
    },
    /// Evaluate every policy across the lambda grid; writes sweep.csv
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the control weight V per operating point; writes frontier.csv
    Frontier {
        #[command(flatten)]
        common: Common,
    },
    /// Run built-in oracle and invariant checks
    Validate {
        /// Worker threads (default: all cores)
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn load(common: &Common) -> Result<ResolvedConfig, CliError> {
    let file = RunConfigFile::from_path(&common.config)?;
    let base_dir = common.config.parent().unwrap_or_else(|| Path::new("."));
    let mut resolved = file.resolve(base_dir)?;
    if let Some(seed) = common.seed {
        resolved.master_seed = seed;
    }
    Ok(resolved)
}

fn with_jobs<T>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    match jobs {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool construction")
            .install(f),
        _ => f(),
    }
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Simulate { common, trace } => {
            let cfg = load(&common)?;
            with_jobs(common.jobs, || cmd_simulate(&cfg, &common.out, trace))?;
            Ok(EXIT_OK)
        }
        Command::Sweep { common } => {
            let cfg = load(&common)?;
            with_jobs(common.jobs, || cmd_sweep(&cfg, &common.out))?;
            Ok(EXIT_OK)
        }
        Command::Frontier { common } => {
            let cfg = load(&common)?;
            with_jobs(common.jobs, || cmd_frontier(&cfg, &common.out))?;
            Ok(EXIT_OK)
        }
        Command::Validate { jobs } => {
            let results = with_jobs(jobs, cmd_validate);
            Ok(if report_validation(&results) { EXIT_OK } else { EXIT_VALIDATION })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
