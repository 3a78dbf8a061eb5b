use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use odro_core::{
    make_problem, run_baseline, run_odro, ConvergenceRecord, OdroConfig, Problem, ProblemParams,
    StateVector,
};

use crate::args::{Emit, Mode};
use crate::checkpoint::write_checkpoint;
use crate::{exit, CliError};

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: String,
    pub params: ProblemParams,
    pub odro: OdroConfig,
    pub mode: Mode,
    pub output_dir: PathBuf,
    pub emit: Vec<Emit>,
    pub baseline_iterations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    NotConverged,
    Diverged,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Converged => exit::CONVERGED,
            Outcome::NotConverged => exit::NOT_CONVERGED,
            Outcome::Diverged => exit::DIVERGED,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Converged => "converged",
            Outcome::NotConverged => "not_converged",
            Outcome::Diverged => "diverged",
        }
    }
}

/// What `summary.txt` reports for one run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub mode: &'static str,
    pub outcome: Outcome,
    pub cycles_used: usize,
    pub total_iterations: u64,
    pub total_objective_evals: usize,
    pub initial_r_total: f64,
    pub final_r_total: f64,
    pub wall_seconds: f64,
    pub message: Option<String>,
}

impl RunSummary {
    pub fn converged(&self) -> bool {
        self.outcome == Outcome::Converged
    }

    pub fn eval_share(&self) -> f64 {
        if self.total_iterations == 0 {
            0.0
        } else {
            self.total_objective_evals as f64 / self.total_iterations as f64
        }
    }

    pub fn to_text(&self, problem: &str) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("problem", &problem);
        line("mode", &self.mode);
        line("status", &self.outcome.as_str());
        line("converged", &self.converged());
        line("cycles_used", &self.cycles_used);
        line("total_iterations", &self.total_iterations);
        line("total_objective_evals", &self.total_objective_evals);
        line(
            "initial_r_total",
            &format_args!("{:e}", self.initial_r_total),
        );
        line("final_r_total", &format_args!("{:e}", self.final_r_total));
        line("eval_share", &self.eval_share());
        line("wall_seconds", &self.wall_seconds);
        if let Some(m) = &self.message {
            line("message", &m);
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub odro: Option<RunSummary>,
    pub baseline: Option<RunSummary>,
}

impl ExperimentReport {
    /// ODRO's outcome decides the status whenever ODRO ran.
    pub fn exit_code(&self) -> i32 {
        self.odro
            .as_ref()
            .or(self.baseline.as_ref())
            .map_or(exit::CONFIG, |s| s.outcome.exit_code())
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, CliError> {
    cfg.odro.validate()?;
    let problem = make_problem(&cfg.problem, &cfg.params)?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;

    let report = match cfg.mode {
        Mode::Odro => ExperimentReport {
            odro: Some(odro_mode(problem.as_ref(), cfg, &cfg.output_dir)?),
            baseline: None,
        },
        Mode::Baseline => ExperimentReport {
            odro: None,
            baseline: Some(baseline_mode(problem.as_ref(), cfg, &cfg.output_dir)?),
        },
        Mode::Both => {
            let odro_dir = cfg.output_dir.join("odro");
            let base_dir = cfg.output_dir.join("baseline");
            for d in [&odro_dir, &base_dir] {
                fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
            }
            let p = problem.as_ref();
            let (odro, baseline) = std::thread::scope(|s| {
                let odro = s.spawn(|| odro_mode(p, cfg, &odro_dir));
                let baseline = baseline_mode(p, cfg, &base_dir);
                (odro.join().expect("odro thread panicked"), baseline)
            });
            ExperimentReport {
                odro: Some(odro?),
                baseline: Some(baseline?),
            }
        }
    };
    Ok(report)
}

fn odro_mode(
    problem: &dyn Problem,
    cfg: &ExperimentConfig,
    dir: &Path,
) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let summary = match run_odro(problem, &cfg.odro) {
        Ok(res) => {
            let summary = RunSummary {
                mode: "odro",
                outcome: if res.converged {
                    Outcome::Converged
                } else {
                    Outcome::NotConverged
                },
                cycles_used: res.cycles_used,
                total_iterations: res.total_iterations,
                total_objective_evals: res.total_objective_evals,
                initial_r_total: res.initial_r_total,
                final_r_total: res.final_r_total,
                wall_seconds: start.elapsed().as_secs_f64(),
                message: None,
            };
            emit_outputs(
                cfg,
                dir,
                &res.history,
                Some(&res.final_state),
                &summary,
                problem.name(),
            )?;
            summary
        }
        Err(e @ odro_core::OdroError::DivergedTooFast { .. }) => {
            let summary = RunSummary {
                mode: "odro",
                outcome: Outcome::Diverged,
                cycles_used: 0,
                total_iterations: 0,
                total_objective_evals: 0,
                initial_r_total: odro_core::state_r_total(problem, &problem.initial_state()),
                final_r_total: f64::INFINITY,
                wall_seconds: start.elapsed().as_secs_f64(),
                message: Some(e.to_string()),
            };
            emit_outputs(cfg, dir, &[], None, &summary, problem.name())?;
            summary
        }
        Err(e) => return Err(e.into()),
    };
    Ok(summary)
}

fn baseline_mode(
    problem: &dyn Problem,
    cfg: &ExperimentConfig,
    dir: &Path,
) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let res = run_baseline(problem, cfg.baseline_iterations, cfg.odro.convergence_tol);
    let outcome = if res.converged {
        Outcome::Converged
    } else if res.diverged {
        Outcome::Diverged
    } else {
        Outcome::NotConverged
    };
    let summary = RunSummary {
        mode: "baseline",
        outcome,
        cycles_used: 0,
        total_iterations: res.total_iterations,
        total_objective_evals: 0,
        initial_r_total: res.initial_r_total,
        final_r_total: res.final_r_total,
        wall_seconds: start.elapsed().as_secs_f64(),
        message: None,
    };
    let state = res.final_state.is_finite().then_some(&res.final_state);
    emit_outputs(cfg, dir, &res.history, state, &summary, problem.name())?;
    Ok(summary)
}

fn emit_outputs(
    cfg: &ExperimentConfig,
    dir: &Path,
    history: &[ConvergenceRecord],
    state: Option<&StateVector>,
    summary: &RunSummary,
    problem: &str,
) -> Result<(), CliError> {
    if cfg.emit.contains(&Emit::History) {
        let path = dir.join("history.csv");
        fs::write(&path, history_csv(history)).map_err(|e| CliError::io(&path, e))?;
    }
    if cfg.emit.contains(&Emit::Summary) {
        let path = dir.join("summary.txt");
        fs::write(&path, summary.to_text(problem)).map_err(|e| CliError::io(&path, e))?;
    }
    if let (true, Some(state)) = (cfg.emit.contains(&Emit::Checkpoint), state) {
        write_checkpoint(state, dir.join("state.chk"))?;
    }
    Ok(())
}

pub fn history_csv(history: &[ConvergenceRecord]) -> String {
    let mut s = String::from("iteration,cycle,phase,r_total\n");
    for r in history {
        let _ = writeln!(s, "{},{},{},{:e}", r.iteration, r.cycle, r.phase, r.r_total);
    }
    s
}

/// Parses a `summary.txt` into key/value pairs.
pub fn parse_summary(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}
