use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mprep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mprep")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json_stdout(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stderr)))
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn complex_re(v: &Value) -> f64 {
    f(&v[0])
}

#[test]
fn aklt_point_analysis() {
    let o = mprep(&["family", "--point", "aklt"]);
    assert_eq!(code(&o), 0);
    let v = json_stdout(&o);
    let lambda: Vec<f64> = v["family"]["lambda"].as_array().unwrap().iter().map(f).collect();
    assert_eq!(lambda, vec![0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
    let spec = v["analysis"]["transfer_spectrum"].as_array().unwrap();
    assert!((complex_re(&spec[0]) - 1.0).abs() < 1e-12);
    for s in &spec[1..] {
        assert!((complex_re(s) + 1.0 / 3.0).abs() < 1e-12);
    }
    assert!((f(&v["analysis"]["xi_max"]) - 1.0 / 3f64.ln()).abs() < 1e-12);
    assert_eq!(v["config"]["descriptor"], "point=aklt");
}

#[test]
fn spectrum_inversion_and_infeasible_exit() {
    let o = mprep(&["family", "--spectrum", "1,0.5,0.5,0.25"]);
    assert_eq!(code(&o), 0);
    let v = json_stdout(&o);
    // λ_P = ¼ Σ_Q s(P,Q) μ_Q with s = +1 when P and Q commute.
    let mu = [1.0, 0.5, 0.5, 0.25];
    let commute = |p: usize, q: usize| p == 0 || q == 0 || p == q;
    for p in 0..4 {
        let want: f64 = (0..4).map(|q| if commute(p, q) { mu[q] } else { -mu[q] }).sum::<f64>() / 4.0;
        assert!((f(&v["family"]["lambda"][p]) - want).abs() < 1e-15);
    }
    let bad = mprep(&["family", "--spectrum", "1,0.9,0.9,-0.9"]);
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("infeasible"));
}

#[test]
fn trajectory_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = mprep(&["family", "--trajectory", "deformedAKLT", "--beta-grid", "0:3:0.25", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(
        lines.next().unwrap(),
        "beta,lambda_1,lambda_2,lambda_3,lambda_4,mu_2,mu_3,mu_4,xi_max,schmidt_1,schmidt_2"
    );
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 13);
    assert!(rows.windows(2).all(|w| w[1][8] > w[0][8]));
    for r in &rows {
        assert!((r[9] - 0.5).abs() < 1e-10 && (r[10] - 0.5).abs() < 1e-10);
    }
}

#[test]
fn prepare_exit_codes() {
    let o = mprep(&["prepare", "--point", "cluster", "--n", "6", "--trials", "100", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    let v = json_stdout(&o);
    assert!(f(&v["min_fidelity"]) >= 1.0 - 1e-9);
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["report"]["kind"], "protocol");

    let o = mprep(&["prepare", "--ising", "--beta", "0.5", "--incomplete", "--n", "8"]);
    assert_eq!(code(&o), 0);
    assert!(f(&json_stdout(&o)["min_fidelity"]) >= 1.0 - 1e-9);

    let o = mprep(&["prepare", "--mpo", "--n", "6", "--trials", "5", "--seed", "3"]);
    assert_eq!(code(&o), 0);

    let dir = tempfile::tempdir().unwrap();
    let random = dir.path().join("random.json");
    let data: Vec<[f64; 2]> = (0..16).map(|k| [((k * 37 % 11) as f64 - 5.0) / 7.0, ((k * 13 % 7) as f64 - 3.0) / 5.0]).collect();
    std::fs::write(&random, serde_json::json!({"d": 4, "chi_left": 2, "chi_right": 2, "data": data}).to_string()).unwrap();
    let o = mprep(&["prepare", "--tensor", random.to_str().unwrap(), "--trials", "5"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not correctable at site"));

    assert_eq!(code(&mprep(&["prepare", "--point", "cluster", "--n", "1"])), 1);
    assert_eq!(code(&mprep(&["prepare", "--point", "cluster", "--trials", "0"])), 1);
    assert_eq!(code(&mprep(&["prepare", "--incomplete", "--point", "cluster"])), 1);
    assert_eq!(code(&mprep(&["prepare", "--no-such-flag"])), 1);
}

#[test]
fn diagnose_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let tet = dir.path().join("tet.json");
    assert_eq!(code(&mprep(&["family", "--lambda", "0.1,0.2,0.3,0.4", "--output", tet.to_str().unwrap()])), 0);
    let cert = dir.path().join("cert.json");
    let o = mprep(&["diagnose", "--tensor", tet.to_str().unwrap(), "--output", cert.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = read_json(&cert);
    assert_eq!(v["certificate"]["verdict"], "Certified");
    assert_eq!(v["certificate"]["basis"]["elements"].as_array().unwrap().len(), 4);

    let real_m = dir.path().join("aklt.json");
    let m = "1,0.5,0,0,2,0.3,0.1,0,1.5";
    assert_eq!(code(&mprep(&["family", "--aklt-deformed", "--m", m, "--output", real_m.to_str().unwrap()])), 0);
    assert_eq!(code(&mprep(&["diagnose", "--tensor", real_m.to_str().unwrap()])), 0);

    let random = dir.path().join("random.json");
    let data: Vec<[f64; 2]> = (0..16).map(|k| [((k * 5 % 9) as f64 - 4.0) / 3.0, ((k * 7 % 5) as f64 - 2.0) / 3.0]).collect();
    std::fs::write(&random, serde_json::json!({"d": 4, "chi_left": 2, "chi_right": 2, "data": data}).to_string()).unwrap();
    let o = mprep(&["diagnose", "--tensor", random.to_str().unwrap(), "--restarts", "16"]);
    assert_eq!(code(&o), 4);
    assert_eq!(json_stdout(&o)["certificate"]["verdict"], "Unknown");

    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{\"d\": 2}").unwrap();
    assert_eq!(code(&mprep(&["diagnose", "--tensor", junk.to_str().unwrap()])), 1);
    assert_eq!(code(&mprep(&["diagnose", "--tensor", dir.path().join("missing.json").to_str().unwrap()])), 1);
}

#[test]
fn peps_exit_codes() {
    let o = mprep(&["peps", "--example", "toric", "--lattice", "2x2-torus", "--beta", "1", "--trials", "200"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_stdout(&o);
    assert!(f(&v["min_fidelity"]) >= 1.0 - 1e-7);

    let o = mprep(&["peps", "--example", "ghz", "--lattice", "3x3-open", "--beta", "0.5", "--trials", "50", "--samples", "2000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json_stdout(&o)["parity_violations"], 0);

    let o = mprep(&["peps", "--example", "toric", "--lattice", "6x6-torus"]);
    assert_eq!(code(&o), 5);
    assert_eq!(code(&mprep(&["peps", "--example", "kagome"])), 1);
    assert_eq!(code(&mprep(&["peps", "--example", "toric", "--lattice", "2by2"])), 1);
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = mprep(&["prepare", "--trajectory", "deformedCluster", "--beta", "0.7", "--n", "5", "--trials", "40", "--seed", "11", "--output", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        std::fs::read_to_string(p).unwrap()
    };
    let (a, b) = (run("a.json"), run("b.json"));
    assert_eq!(a.replace("a.json", "X"), b.replace("b.json", "X"));
    let x = mprep(&["family", "--aklt-deformed", "--seed", "5"]);
    let y = mprep(&["family", "--aklt-deformed", "--seed", "5"]);
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# prepare run\npoint = ghz\nn = 4\ntrials = 7\nseed = 3\n").unwrap();
    let o = mprep(&["prepare", "--config", cfg.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_stdout(&o);
    assert_eq!(v["config"]["seed"], 9);
    assert_eq!(v["config"]["n"], 4);
    assert_eq!(v["config"]["trials"], 7);
    assert_eq!(v["config"]["descriptor"], "point=ghz");
    assert_eq!(v["report"]["fidelities"].as_array().unwrap().len(), 7);

    std::fs::write(&cfg, "this line has no equals sign\n").unwrap();
    assert_eq!(code(&mprep(&["prepare", "--config", cfg.to_str().unwrap()])), 1);
    std::fs::write(&cfg, "unknown-key = 1\n").unwrap();
    assert_eq!(code(&mprep(&["prepare", "--point", "ghz", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn selftest_single_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("self.json");
    let o = mprep(&["selftest", "--criterion", "2", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("PASS criterion  2"));
    assert_eq!(read_json(&out)["all_pass"], true);
    assert_eq!(code(&mprep(&["selftest", "--criterion", "13"])), 1);
}
