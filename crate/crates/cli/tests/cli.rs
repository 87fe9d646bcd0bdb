use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn selfnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selfnorm"))
        .args(args)
        .env_remove("SELFNORM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = selfnorm(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn table_defaults() {
    let csv = stdout(&["table"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "m,k,t,count,total,empirical,survival,ratio,degenerate");
    assert_eq!(lines.len(), 1 + 4 * 13);
    assert!(lines[1].starts_with("1,15,0.0,1619,3182,"));
    assert!(lines[52].starts_with("4,3,1.4,140,3182,"));
    assert!(!csv.contains('\r'));
}

#[test]
fn table_ignores_worker_count() {
    let one = stdout(&["table", "--threads", "1"]);
    assert_eq!(one, stdout(&["table", "--threads", "2"]));
    assert_eq!(one, stdout(&["table", "--threads", "8"]));
    let env = Command::new(env!("CARGO_BIN_EXE_selfnorm"))
        .arg("table")
        .env("SELFNORM_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(env.stdout).unwrap(), one);
}

#[test]
fn table_round_trips_through_in() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let p = path.to_str().unwrap();
    stdout(&["table", "--out", p]);
    let written = fs::read_to_string(&path).unwrap();
    assert_eq!(stdout(&["table", "--in", p]), written);
    let json = stdout(&["table", "--in", p, "--format", "json"]);
    assert!(json.contains("\"rows\""));
}

#[test]
fn mc_is_seed_reproducible_and_readable() {
    let args = ["mc", "--n", "500", "--alpha", "0.3", "--replicates", "2000", "--seed", "11", "--t", "0,1"];
    let a = stdout(&args);
    let b = stdout(&[&args[..], &["--threads", "8"]].concat());
    assert_eq!(a, b);
    let other_seed = stdout(&["mc", "--n", "500", "--alpha", "0.3", "--replicates", "2000", "--seed", "12", "--t", "0,1"]);
    assert_ne!(a, other_seed);

    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "mc.csv", &a);
    assert_eq!(stdout(&["table", "--in", &path]), a);
}

#[test]
fn mc_zero_source_is_degenerate() {
    let csv = stdout(&["mc", "--source", "zero", "--n", "100", "--m", "2", "--replicates", "1000", "--t", "0"]);
    assert_eq!(csv.lines().nth(1).unwrap(), "2,25,0.0,0,1000,0.0,0.5,0.0,1000");
}

#[test]
fn psi_of_iid_chain_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let chain = write(
        dir.path(),
        "iid.json",
        r#"{"name": "coin", "states": 2, "P": [[0.3, 0.7], [0.3, 0.7]], "f": [1.0, -1.0]}"#,
    );
    let csv = stdout(&["psi", "--chain", &chain, "--max-gap", "5"]);
    assert_eq!(csv, "gap,psi\n1,0.0\n2,0.0\n3,0.0\n4,0.0\n5,0.0\n");
    // the output is readable by the ci column reader
    let psi = write(dir.path(), "psi.csv", &csv);
    let ci = stdout(&["ci", "--in", &psi, "--column", "psi"]);
    assert!(ci.starts_with("lo,hi,level,center,m,k\n0.0,0.0,0.95,0.0,1,2\n"), "{ci}");
}

#[test]
fn psi_of_two_state_chain() {
    let dir = tempfile::tempdir().unwrap();
    let chain = write(dir.path(), "c.json", r#"{"states": 2, "P": [0.9, 0.1, 0.2, 0.8], "f": [0, 1]}"#);
    let csv = stdout(&["psi", "--chain", &chain, "--max-gap", "2"]);
    let v: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    // λ = 0.7; the worst entry is P(1→1)/π(1) - 1 = λⁿ·π(0)/π(1) = 2λⁿ
    assert!((v[0] - 1.4).abs() < 1e-12 && (v[1] - 0.98).abs() < 1e-12, "{v:?}");
}

#[test]
fn bound_values() {
    assert_eq!(stdout(&["bound", "--fan", "--beta", "2", "--x", "1", "--v", "1"]), "0.778801\n");
    assert_eq!(
        stdout(&["bound", "--x", "1", "--n", "10000", "--alpha", "0.5", "--rho", "0.5", "--precision", "10"]),
        "0.9656093976\n"
    );
    let out = selfnorm(&["bound", "--x", "1000", "--n", "10000", "--alpha", "0.5"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside the valid range"));
}

#[test]
fn cf_dump() {
    let csv = stdout(&["cf", "--x", "3141/10000"]);
    let digits: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(digits, ["3", "5", "2", "3", "1", "15", "4"]);
    let grid = stdout(&["cf", "--index", "1", "--terms", "3"]);
    assert!(grid.starts_with("i,digit,zeta\n1,3183,14.70998442428578"), "{grid}");
}

#[test]
fn ci_from_value_file() {
    let dir = tempfile::tempdir().unwrap();
    // blocks of length 1 at positions 1, 3, 5, …: the values 1, 2, 3, 4, 5
    let data = write(dir.path(), "x.txt", "1\n9\n2\n9\n3\n9\n4\n9\n5\n9\n");
    let csv = stdout(&["ci", "--in", &data, "--m", "1"]);
    let fields: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields[3], 3.0);
    // 1.959964 · √10 / 5
    assert!((fields[1] - 3.0 - 1.959_963_984_540_054 * 10f64.sqrt() / 5.0).abs() < 1e-9);
}

#[test]
fn mdp_small_sweep() {
    let csv = stdout(&["mdp", "--n", "1000,4000", "--replicates", "1000", "--seed", "1"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with(",-0.5,-0.5"));
    let json = stdout(&["mdp", "--n", "1000,4000", "--replicates", "1000", "--seed", "1", "--set", "{1}", "--format", "json"]);
    assert!(json.contains("\"empty_interior\": true"));
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| selfnorm(args).status.code().unwrap();
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["table", "--no-such-flag"]), 1);
    assert_eq!(code(&["nonsense"]), 1);
    assert_eq!(code(&["table", "--m", "16"]), 1);
    assert_eq!(code(&["mc", "--n", "100", "--alpha", "0.3", "--replicates", "10"]), 1);
    assert_eq!(code(&["cf", "--x", "3/2"]), 1);
    assert_eq!(code(&["ci", "--in", "/nonexistent/file"]), 1);
    assert_eq!(code(&["bound", "--fan", "--beta", "3", "--x", "1", "--v", "1"]), 1);
    // too few digits at this depth is a numerical failure, not bad input
    assert_eq!(code(&["cf", "--index", "1", "--terms", "1000"]), 2);
    let err = selfnorm(&["cf", "--index", "1", "--terms", "1000"]);
    assert!(!String::from_utf8_lossy(&err.stderr).is_empty());
}
