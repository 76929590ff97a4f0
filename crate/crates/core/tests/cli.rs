use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use phaseopt::cli::run_with;
use proptest::prelude::*;
use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_phaseopt"));
    cmd.env_remove("PHASEOPT_DIM");
    cmd
}

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn pipe(first: &[&str], second: &[&str]) -> Value {
    let produced = run(first, "");
    assert!(produced.status.success(), "{}", String::from_utf8_lossy(&produced.stderr));
    let out = run(second, &stdout(&produced));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(&out)).unwrap()
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("phaseopt-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn vacuum_generated_matrix_is_not_extremal() {
    let report = pipe(&["gen", "state", "--levels", "1.0@0", "--dim", "64"], &["check", "extremal"]);
    assert_eq!(report["verdict"], "fail");
    assert_eq!(report["witnesses"]["span"]["extremal"], false);
    assert!(report["witnesses"]["real_certificate"].is_object());
}

#[test]
fn canonical_is_preprocessing_clean_from_zero() {
    let report = pipe(&["gen", "canonical", "--dim", "128"], &["check", "preclean"]);
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["witnesses"]["n0"], 0);
}

#[test]
fn example5_is_consistent_with_sharpness() {
    let report = pipe(&["gen", "example5", "--dim", "64"], &["check", "sharp"]);
    assert_eq!(report["witnesses"]["verdict"], "consistent");
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["truncation_dim"], 64);
}

#[test]
fn every_generator_output_validates() {
    let dir = scratch_dir("eta");
    let vectors = dir.join("eta.json");
    std::fs::write(&vectors, "[[[1,0],[0,0]],[[0,0],[1,0]],[[0.6,0],[0,0.8]]]").unwrap();
    let gens: Vec<Vec<&str>> = vec![
        vec!["gen", "canonical", "--dim", "10"],
        vec!["gen", "chessboard", "--xi", "-0.3,0.4", "--dim", "10"],
        vec!["gen", "state", "--levels", "0.25@0,0.75@4", "--dim", "10"],
        vec!["gen", "eta", "--vectors", vectors.to_str().unwrap()],
        vec!["gen", "example4", "--n0", "2", "--dim", "10"],
        vec!["gen", "example5", "--dim", "10"],
    ];
    for g in gens {
        let report = pipe(&g, &["validate", "--assert"]);
        assert_eq!(report["verdict"], "pass", "{g:?}");
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        vec!["gen", "state", "--levels", "0.5@0,0.5@2", "--dim", "20"],
        vec!["norm-sweep", "--dims", "4,8,16"],
        vec!["oracle-et", "--dim", "6"],
    ] {
        let a = run(&args, "");
        let b = run(&args, "");
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let m = stdout(&run(&["gen", "example5", "--dim", "40"], ""));
    let a = run(&["channel-identity", "--samples", "3"], &m);
    let b = run(&["channel-identity", "--samples", "3"], &m);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn environment_overrides_default_dimension() {
    let out = bin().args(["gen", "canonical"]).env("PHASEOPT_DIM", "7").output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["dim"], 7);
    let out = bin().args(["gen", "canonical"]).env("PHASEOPT_DIM", "seven").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("PHASEOPT_DIM"));
}

#[test]
fn config_file_is_discovered_and_explicit() {
    let dir = scratch_dir("cfg");
    std::fs::write(dir.join("phaseopt.cfg"), "dim = 9\n").unwrap();
    let out = bin().args(["gen", "example5"]).current_dir(&dir).output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["dim"], 9);

    let other = dir.join("other.cfg");
    std::fs::write(&other, "dim = 5 # small\n").unwrap();
    let out = bin().args(["gen", "example5", "--config", other.to_str().unwrap()]).output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["dim"], 5);

    std::fs::write(&other, "dimension = 5\n").unwrap();
    let out = bin().args(["gen", "example5", "--config", other.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"));
}

#[test]
fn files_in_and_out() {
    let dir = scratch_dir("io");
    let matrix = dir.join("m.json");
    let report = dir.join("r.json");
    assert!(run(&["gen", "canonical", "--dim", "12", "--out", matrix.to_str().unwrap()], "").status.success());
    let out = run(&["check", "rank", "--in", matrix.to_str().unwrap(), "--out", report.to_str().unwrap()], "");
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["witnesses"]["rank"], 1);
    assert_eq!(v["witnesses"]["growth"].as_array().unwrap().len(), 3);
}

#[test]
fn assert_flag_controls_exit_status() {
    let m = stdout(&run(&["gen", "chessboard", "--xi", "0", "--dim", "64"], ""));
    assert_eq!(run(&["check", "sharp"], &m).status.code(), Some(0));
    assert_eq!(run(&["check", "sharp", "--assert"], &m).status.code(), Some(1));
    let canonical = stdout(&run(&["gen", "canonical", "--dim", "64"], ""));
    let out = run(&["recover-state", "--assert"], &canonical);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["witnesses"]["reason"].is_string());
}

#[test]
fn two_input_checks() {
    let dir = scratch_dir("pair");
    let m = dir.join("m.json");
    let vac = dir.join("vac.json");
    std::fs::write(&m, stdout(&run(&["gen", "example5", "--dim", "64"], ""))).unwrap();
    std::fs::write(&vac, stdout(&run(&["gen", "state", "--levels", "1@0", "--dim", "64"], ""))).unwrap();
    let rotated = stdout(&run(&["smear", "--nu", "dirac:pi/3"], &std::fs::read_to_string(&m).unwrap()));
    let v: Value =
        serde_json::from_str(&stdout(&run(&["check", "postclass", "--other", m.to_str().unwrap()], &rotated))).unwrap();
    assert_eq!(v["verdict"], "pass");
    let v: Value = serde_json::from_str(&stdout(&run(
        &["check", "uequiv", "--in", m.to_str().unwrap(), "--other", vac.to_str().unwrap()],
        "",
    )))
    .unwrap();
    assert_eq!(v["verdict"], "fail");
    let chess = stdout(&run(&["gen", "chessboard", "--xi", "0", "--dim", "64"], ""));
    let v: Value =
        serde_json::from_str(&stdout(&run(&["check", "postclass", "--other", m.to_str().unwrap()], &chess))).unwrap();
    assert_eq!(v["verdict"], "inapplicable");
}

#[test]
fn csv_outputs() {
    let sweep = stdout(&run(&["norm-sweep", "--dims", "4,16"], ""));
    let lines: Vec<&str> = sweep.lines().collect();
    assert_eq!(lines[0], "dim,norm");
    assert!(lines[1].starts_with("4,9.88664167435518"));
    let m = stdout(&run(&["gen", "canonical", "--dim", "8"], ""));
    let curve = stdout(&run(&["density", "--number", "2", "--grid", "16"], &m));
    assert_eq!(curve.lines().count(), 17);
    assert!(curve.starts_with("theta,density\n"));
}

#[test]
fn groupsim_scenario_file() {
    let dir = scratch_dir("group");
    let file = dir.join("scenario.json");
    std::fs::write(
        &file,
        r#"{"N":4,"weights":[0,1,2,3],"seed":{"dim":4,"entries":[[1,0],[1,0],[1,0],[1,0],[1,0],[1,0],[1,0],[1,0],[1,0],[1,0],[1,0],[1,0],[1,0],[1,0],[1,0],[1,0]]},"nu":[0.5,0.5,0,0],"checks":["covariance","additivity","smearing","norm_bound","mix","covariantize","pre_norm","unitary_pre"]}"#,
    )
    .unwrap();
    let out = run(&["groupsim", "--in", file.to_str().unwrap(), "--assert"], "");
    assert!(out.status.success(), "{}", stdout(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["witnesses"]["approximately_sharp"], true);
    assert!(v["witnesses"]["note"].as_str().unwrap().contains("singleton"));
    assert_eq!(v["witnesses"]["checks"].as_array().unwrap().len(), 8);

    std::fs::write(&file, r#"{"N":4,"weights":[0],"seed":{"dim":1,"entries":[[1,0]]},"nu":[1],"checks":[]}"#).unwrap();
    let out = run(&["groupsim", "--in", file.to_str().unwrap()], "");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nu"));
}

#[test]
fn diagnostics_for_bad_input() {
    let out = run(&["check", "sharp"], "{\"dim\": 2, \"entries\": 5}");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    let out = run(&["check", "uequiv", "--other", "/nonexistent.json"], &stdout(&run(&["gen", "canonical"], "")));
    assert_eq!(out.status.code(), Some(2));
    let a = stdout(&run(&["gen", "canonical", "--dim", "4"], ""));
    let dir = scratch_dir("mismatch");
    let b = dir.join("b.json");
    std::fs::write(&b, stdout(&run(&["gen", "canonical", "--dim", "5"], ""))).unwrap();
    let out = run(&["check", "uequiv", "--other", b.to_str().unwrap()], &a);
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension mismatch"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn in_process_runs_are_deterministic(dim in 2usize..24, re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let xi = format!("{},{}", re * 0.7, im * 0.7);
        let dim = dim.to_string();
        let argv = ["phaseopt", "gen", "chessboard", "--xi", xi.as_str(), "--dim", dim.as_str()];
        let mut first = Vec::new();
        let mut second = Vec::new();
        prop_assert_eq!(run_with(argv, &mut std::io::empty(), &mut first, &mut Vec::new()), 0);
        prop_assert_eq!(run_with(argv, &mut std::io::empty(), &mut second, &mut Vec::new()), 0);
        prop_assert_eq!(&first, &second);
        let mut report = Vec::new();
        prop_assert_eq!(run_with(["phaseopt", "validate", "--assert"], &mut first.as_slice(), &mut report, &mut Vec::new()), 0);
    }
}
