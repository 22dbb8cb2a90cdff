use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_renyikit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_rows(o: &Output) -> Vec<Value> {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice::<Value>(&o.stdout).unwrap().as_array().unwrap().clone()
}

fn write_diag(dir: &Path, name: &str, diag: &[f64]) -> PathBuf {
    let d = diag.len();
    let mut entries = vec![[0.0, 0.0]; d * d];
    for (i, &x) in diag.iter().enumerate() {
        entries[i * d + i] = [x, 0.0];
    }
    let v = serde_json::json!({"dims": [d], "matrix": {"rows": d, "cols": d, "entries": entries}});
    let path = dir.join(name);
    std::fs::write(&path, v.to_string()).unwrap();
    path
}

fn f(v: &Value) -> f64 {
    match v {
        Value::String(s) if s == "inf" => f64::INFINITY,
        other => other.as_f64().unwrap(),
    }
}

#[test]
fn divergence_rows_for_the_canonical_pair() {
    let dir = TempDir::new().unwrap();
    let p = write_diag(dir.path(), "p.json", &[0.5, 0.5]);
    let q = write_diag(dir.path(), "q.json", &[0.25, 0.75]);
    let o = run(&["divergence", "--rho", p.to_str().unwrap(), "--sigma", q.to_str().unwrap(), "--family", "petz"]);
    let rows = json_rows(&o);
    assert_eq!(rows.len(), 3);
    assert!((f(&rows[1]["value_bits"]) - 0.207519).abs() < 1e-6);
    assert!((f(&rows[2]["value_bits"]) - 0.415037).abs() < 1e-6);
}

#[test]
fn divergence_of_equal_states_is_zero() {
    let dir = TempDir::new().unwrap();
    let q = write_diag(dir.path(), "q.json", &[0.25, 0.75]);
    let q = q.to_str().unwrap();
    let rows = json_rows(&run(&["divergence", "--rho", q, "--sigma", q, "--alpha", "0.5,1,2,5"]));
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| f(&r["value_bits"]).abs() < 1e-12));
}

#[test]
fn csv_prints_infinity() {
    let dir = TempDir::new().unwrap();
    let a = write_diag(dir.path(), "a.json", &[1.0, 0.0]);
    let b = write_diag(dir.path(), "b.json", &[0.0, 1.0]);
    let o = run(&[
        "divergence",
        "--rho",
        a.to_str().unwrap(),
        "--sigma",
        b.to_str().unwrap(),
        "--alpha",
        "2",
        "--family",
        "sandwiched",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "family,alpha,value_bits\nsandwiched,2,inf\n");
}

#[test]
fn strong_converse_rows_for_the_identity() {
    let rows = json_rows(&run(&["exponent", "--kind", "sc", "--preset", "identity_2", "--r", "2.5,3"]));
    assert_eq!(rows.len(), 2);
    assert!((f(&rows[0]["value_bits"]) - 0.5).abs() < 1e-6);
    assert!((f(&rows[1]["value_bits"]) - 1.0).abs() < 1e-6);
    assert!(rows[0]["report"]["rho_star"].is_object());
}

#[test]
fn replacer_against_itself() {
    let rows = json_rows(&run(&["exponent", "--kind", "sc", "--preset", "replacer", "--r", "1"]));
    assert!((f(&rows[0]["value_bits"]) - 1.0).abs() < 1e-6);
    let rows = json_rows(&run(&["exponent", "--kind", "stein", "--preset", "replacer"]));
    assert_eq!(rows.len(), 1);
    assert_eq!(f(&rows[0]["value_bits"]), 0.0);
}

#[test]
fn support_failure_is_flagged() {
    let dir = TempDir::new().unwrap();
    let pure = write_diag(dir.path(), "pure.json", &[1.0, 0.0]);
    let o = run(&["exponent", "--kind", "stein", "--preset", "identity_2", "--sigma", pure.to_str().unwrap(), "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("stein,inf,"), "{row}");
    assert!(row.contains("+inf (support condition fails)"));
}

#[test]
fn preset_json_round_trips() {
    for name in ["identity_2", "depolarizing_0.1", "illumination_toy_0.8_0.1", "replacer_3"] {
        let o = run(&["presets", name]);
        assert!(o.status.success());
        let text = stdout(&o);
        let ch = renyikit::qmat::json::channel_from_json(&text).unwrap();
        assert_eq!(renyikit::qmat::json::channel_to_json(&ch), text.trim_end(), "{name}");
    }
}

#[test]
fn illumination_degenerates_to_identity() {
    let toy = stdout(&run(&["presets", "illumination_toy_1_0"]));
    let id = stdout(&run(&["presets", "identity_2"]));
    let a = renyikit::qmat::json::channel_from_json(&toy).unwrap();
    let b = renyikit::qmat::json::channel_from_json(&id).unwrap();
    assert!(renyikit::qmat::linalg::max_abs_diff(a.choi().matrix(), b.choi().matrix()) < 1e-15);
}

#[test]
fn replacer_preset_is_finite_against_its_state() {
    let dir = TempDir::new().unwrap();
    let sigma = dir.path().join("sigma.json");
    let o = run(&["presets", "replacer", "--alternative", "--out", sigma.to_str().unwrap()]);
    assert!(o.status.success());
    let rows = json_rows(&run(&[
        "channel-divergence",
        "--preset",
        "replacer",
        "--sigma",
        sigma.to_str().unwrap(),
        "--alpha",
        "2",
    ]));
    assert_eq!(rows[0]["infinite"], Value::Bool(false));
    assert_eq!(f(&rows[0]["value_bits"]), 0.0);
}

#[test]
fn verify_dpi_passes_and_logs() {
    let dir = TempDir::new().unwrap();
    let log = dir.path().join("dpi.jsonl");
    let o = run(&["verify", "dpi", "--seeds", "0..100", "--log", log.to_str().unwrap()]);
    let rows = json_rows(&o);
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!((r["passed"].as_u64(), r["failed"].as_u64()), (Some(100), Some(0)));
    }
    let lines = std::fs::read_to_string(&log).unwrap();
    assert_eq!(lines.lines().count(), 200);
    let first: renyikit::verify::CheckRecord = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert!(first.ok);
}

#[test]
fn verify_stein_classical() {
    let rows = json_rows(&run(&["verify", "stein-classical", "--seeds", "0"]));
    let rate = rows.iter().find(|r| r["check"] == "stein-rate").unwrap();
    assert_eq!(rate["passed"].as_u64(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let q = write_diag(dir.path(), "q.json", &[0.25, 0.75]);
    let q = q.to_str().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"dims\": [2],\n \"matrix\": ").unwrap();

    let o = run(&["divergence", "--rho", bad.to_str().unwrap(), "--sigma", q]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    assert_eq!(run(&["hypothesis-test", "--rho", q, "--sigma", q, "--epsilon", "1.5"]).status.code(), Some(3));
    assert_eq!(run(&["verify", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "appendixA", "--seeds", "0..3", "--tol", "1e-300"]).status.code(), Some(4));
    assert_eq!(run(&["exponent", "--kind", "sc", "--preset", "identity_2"]).status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = bin()
            .env("RENYIKIT_THREADS", "1")
            .args(["simulate-adaptive", "--preset", "depolarizing_0.2", "--random-rounds", "2", "--seeds", "0..4"])
            .args(["--format", "csv", "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = bin().env("RENYIKIT_THREADS", "zero").args(["presets"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn superdense_coding_is_tight() {
    let rows = json_rows(&run(&["simulate-feedback", "--preset", "identity_2", "--superdense", "--alpha", "1.5,2,3"]));
    for r in rows {
        assert!((f(&r["p_success"]) - 1.0).abs() < 1e-12);
        assert!((f(&r["p_success_replacer"]) - 0.25).abs() < 1e-12);
        assert!((f(&r["bound_lhs"]) - f(&r["bound_rhs"])).abs() < 1e-6);
    }
}

#[test]
fn adaptive_strategy_file_round_trip() {
    let dir = TempDir::new().unwrap();
    let s = renyikit::sim::random_strategy(2, 2, 2, 7).unwrap();
    let j = renyikit::sim::adaptive::StrategyJson::from(&s);
    let path = dir.path().join("s.json");
    std::fs::write(&path, serde_json::to_string(&j).unwrap()).unwrap();
    let rows = json_rows(&run(&[
        "simulate-adaptive",
        "--preset",
        "amplitude_damping_0.3",
        "--strategy",
        path.to_str().unwrap(),
        "--alpha",
        "2",
        "--epsilon",
        "0.2",
    ]));
    assert_eq!(rows.len(), 1);
    assert!((f(&rows[0]["type1"]) - 0.2).abs() < 1e-9);
    assert_eq!(rows[0]["renyi_cb_ok"], Value::Bool(true));
    assert_eq!(rows[0]["nagaoka_ok"], Value::Bool(true));
}
