use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use odro_core::{OdroConfig, ProblemParams};

use crate::experiment::ExperimentConfig;
use crate::CliError;

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "ODRO_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "odro_out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Odro,
    Baseline,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum Emit {
    History,
    Summary,
    Checkpoint,
}

/// Accelerate a steady-state iteration with online POD-subspace optimization.
#[derive(Debug, Parser)]
#[command(name = "odro", version)]
pub struct Cli {
    /// linear_map, lorenz, chafee_infante or heat_cfl
    #[arg(long)]
    pub problem: String,

    /// Problem parameter, e.g. `--param rho=28` (repeatable)
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,

    /// Snapshots per cycle (N)
    #[arg(long, default_value_t = 5)]
    pub snapshots: usize,

    /// Iterations between snapshots (K)
    #[arg(long, default_value_t = 80)]
    pub interval: usize,

    /// POD modes (O)
    #[arg(long, default_value_t = 5)]
    pub modes: usize,

    /// Optimizer budget is N*K / divisor evaluations per cycle
    #[arg(long, default_value_t = 10)]
    pub budget_divisor: usize,

    /// Convergence tolerance on r_total
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,

    #[arg(long, default_value_t = 100)]
    pub max_cycles: usize,

    #[arg(long, value_enum, default_value_t = Mode::Odro)]
    pub mode: Mode,

    /// Output directory [default: $ODRO_OUT_DIR or ./odro_out]
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Seed for randomly generated problems
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Stop iterating early once r_total exceeds this multiple of the cycle start
    #[arg(long, default_value_t = 1e6)]
    pub divergence_factor: f64,

    /// Drop POD modes with singular value below this fraction of the largest
    #[arg(long, default_value_t = 1e-8)]
    pub rank_tol: f64,

    /// Baseline iteration count [default: N*K*max_cycles]
    #[arg(long)]
    pub baseline_iterations: Option<u64>,

    /// Files to write
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Emit::History, Emit::Summary])]
    pub emit: Vec<Emit>,
}

impl Cli {
    pub fn into_config(self) -> Result<ExperimentConfig, CliError> {
        let mut params = ProblemParams::new();
        params.insert("seed", self.seed);
        for pair in &self.params {
            params.insert_pair(pair)?;
        }
        let odro = OdroConfig {
            n_snapshots: self.snapshots,
            interval: self.interval,
            n_modes: self.modes,
            budget_divisor: self.budget_divisor,
            convergence_tol: self.tol,
            max_cycles: self.max_cycles,
            divergence_factor: self.divergence_factor,
            rank_tol: self.rank_tol,
            rng_seed: self.seed,
        };
        odro.validate()?;
        let output_dir = self
            .out
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let baseline_iterations = self
            .baseline_iterations
            .unwrap_or((self.snapshots * self.interval * self.max_cycles) as u64);
        Ok(ExperimentConfig {
            problem: self.problem,
            params,
            odro,
            mode: self.mode,
            output_dir,
            emit: self.emit,
            baseline_iterations,
        })
    }
}
