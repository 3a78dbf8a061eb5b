use std::path::Path;
use std::process::{Command, Output};

use odro_cli::experiment::parse_summary;
use odro_cli::read_checkpoint;

fn odro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_odro"))
        .args(args)
        .env_remove("ODRO_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path) -> Vec<(String, String)> {
    parse_summary(&std::fs::read_to_string(dir.join("summary.txt")).unwrap())
}

fn get<'a>(kv: &'a [(String, String)], key: &str) -> &'a str {
    kv.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .unwrap_or_else(|| panic!("missing {key}"))
}

#[test]
fn lorenz_odro_writes_history_summary_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = odro(&[
        "--problem",
        "lorenz",
        "--out",
        out,
        "--emit",
        "history,summary,checkpoint",
    ]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );

    let kv = summary(dir.path());
    for key in [
        "converged",
        "cycles_used",
        "total_iterations",
        "total_objective_evals",
        "final_r_total",
        "eval_share",
        "wall_seconds",
    ] {
        get(&kv, key);
    }
    assert_eq!(get(&kv, "converged"), "true");
    let cycles: usize = get(&kv, "cycles_used").parse().unwrap();
    assert!(get(&kv, "final_r_total").parse::<f64>().unwrap() < 1e-10);
    assert!(get(&kv, "eval_share").parse::<f64>().unwrap() <= 0.1 + 1e-12);

    let csv = std::fs::read_to_string(dir.path().join("history.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iteration,cycle,phase,r_total"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let iterations: Vec<u64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(iterations.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(rows.iter().filter(|r| r[2] == "optimize").count(), cycles);

    let state = read_checkpoint(dir.path().join("state.chk")).unwrap();
    assert_eq!(state.n_dof(), 3);
    assert!((state[2] - 27.0).abs() < 1e-8);
}

#[test]
fn both_mode_uses_subdirectories() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = odro(&[
        "--problem",
        "linear_map",
        "--mode",
        "both",
        "--snapshots",
        "5",
        "--interval",
        "10",
        "--modes",
        "2",
        "--max-cycles",
        "3",
        "--baseline-iterations",
        "100",
        "--out",
        out,
    ]);
    // ODRO does not reach the tolerance on this map within 3 cycles
    assert_eq!(res.status.code(), Some(2));
    let base = summary(&dir.path().join("baseline"));
    assert_eq!(get(&base, "total_iterations"), "100");
    assert_eq!(get(&base, "total_objective_evals"), "0");
    let csv = std::fs::read_to_string(dir.path().join("baseline/history.csv")).unwrap();
    let r: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(
        r.windows(2).skip(5).all(|w| w[1] > w[0]),
        "baseline residual grows monotonically"
    );
    assert!(r[99] / r[0] > 1e3);
    assert!(dir.path().join("odro/summary.txt").exists());
}

#[test]
fn violent_heat_reports_divergence_with_hint() {
    let dir = tempfile::tempdir().unwrap();
    let res = odro(&[
        "--problem",
        "heat_cfl",
        "--param",
        "rr=2.0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(3));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(
        err.contains("K = 80") && err.contains("--interval"),
        "{err}"
    );
    assert_eq!(get(&summary(dir.path()), "status"), "diverged");
}

#[test]
fn config_errors_exit_4() {
    for args in [
        &["--problem", "nope"][..],
        &["--problem", "lorenz", "--param", "rho=10"],
        &["--problem", "lorenz", "--modes", "9"],
        &["--problem", "lorenz", "--mode", "sideways"],
        &["--snapshots", "5"],
    ] {
        let res = odro(args);
        assert_eq!(
            res.status.code(),
            Some(4),
            "{args:?}: {}",
            String::from_utf8_lossy(&res.stderr)
        );
    }
}

#[test]
fn out_dir_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let res = Command::new(env!("CARGO_BIN_EXE_odro"))
        .args(["--problem", "chafee_infante", "--emit", "summary"])
        .env("ODRO_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(0));
    assert_eq!(get(&summary(dir.path()), "converged"), "true");
    assert!(!dir.path().join("history.csv").exists());
}

#[test]
fn seeded_random_map_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        odro(&[
            "--problem",
            "linear_map",
            "--param",
            "n=4",
            "--param",
            "radius=1.05",
            "--seed",
            "3",
            "--max-cycles",
            "2",
            "--out",
            d.path().to_str().unwrap(),
        ]);
    }
    let read =
        |d: &tempfile::TempDir| std::fs::read_to_string(d.path().join("history.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}
