use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsc-thermo")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn probs_writes_versioned_csv() {
    let out = run(&["probs", "--grid", "0.2:0.1;0.3:0.4", "--length", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("# schema_version=1"));
    assert!(text.contains("p,eps,y,q_transfer,q_bruteforce,rel_err"));
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    // every word of length 1..=5 for both cells, plus the header
    assert_eq!(rows, 1 + 2 * 62);
}

#[test]
fn decay_passes_on_mild_cell() {
    let out = run(&["decay", "--grid", "0.2:0.05", "--max-n", "10", "--samples", "64"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("eps_lt_p"));
}

#[test]
fn decay_reports_failed_check() {
    let out = run(&["decay", "--grid", "0.45:0.05", "--max-n", "6", "--samples", "64"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("check failed"));
}

#[test]
fn gfun_agrees() {
    let out = run(&["gfun", "--p", "0.2", "--eps", "0.1", "--windows", "5", "--length", "12"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("all_plus"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "p = 0.2\nbogus = 1\n").unwrap();
    let out = run(&["probs", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));

    let out = run(&["probs", "--p", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# comment\np = 0.3\neps = 0.2\nlength = 2\n").unwrap();
    let out = run(&["probs", "--config", cfg.to_str().unwrap(), "--eps", "0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("0.3,0.25,")), "{text}");
}

#[test]
fn simulate_then_bench_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("path.bin");
    let csv = dir.path().join("path.csv");
    for target in [&bin, &csv] {
        let out = run(&["simulate", "--p", "0.1", "--eps", "0.2", "--n", "5000", "--seed", "4", "--out", target.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(&fs::read(&bin).unwrap()[..3], b"BSC");
    assert!(fs::read_to_string(&csv).unwrap().starts_with("# schema_version=1"));

    let report = dir.path().join("bench.jsonl");
    let out = run(&[
        "bench", "--p", "0.1", "--eps", "0.2", "--input", bin.to_str().unwrap(),
        "--algorithms", "exact_bf,gibbs,dude", "--k-max", "3", "--out", report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lines: Vec<serde_json::Value> = fs::read_to_string(&report)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines[0]["schema_version"], 1);
    let bers: Vec<f64> = lines[1..].iter().filter_map(|r| r["ber"].as_f64()).collect();
    assert!(bers.len() >= 3 && bers.iter().all(|b| (0.0..0.5).contains(b)));
    assert!(dir.path().join("bench.table.md").exists());
}

#[test]
fn bench_records_short_sequence_failure() {
    let out = run(&["bench", "--p", "0.1", "--eps", "0.2", "--n", "5", "--algorithms", "dude", "--k", "4"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("\"error\""));
}
