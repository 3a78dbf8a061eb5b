use std::process::ExitCode;

use clap::Parser;
use odro_cli::{exit, run_experiment, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::CONFIG as u8
            } else {
                0
            });
        }
    };
    let cfg = match cli.into_config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("odro: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run_experiment(&cfg) {
        Ok(report) => {
            for s in report.odro.iter().chain(&report.baseline) {
                println!(
                    "{:<8} {:<13} cycles={:<4} iterations={:<7} evals={:<6} r_total={:.3e} ({:.3}s)",
                    s.mode,
                    s.outcome.as_str(),
                    s.cycles_used,
                    s.total_iterations,
                    s.total_objective_evals,
                    s.final_r_total,
                    s.wall_seconds
                );
                if let Some(m) = &s.message {
                    eprintln!("odro: {m}");
                }
            }
            println!("output: {}", cfg.output_dir.display());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("odro: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
