use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lopt"))
        .args(args)
        .env_remove("LOPT_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad json ({e}): {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key} in {v}"))
}

#[test]
fn toffoli_three_qubits_simulated() {
    let out = lopt(&["toffoli", "--qubits", "3", "--phase", "pi", "--simulate"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((num(&v, "success_probability_analytic") - 0.0075).abs() < 1e-4);
    let sim = &v["simulated"];
    assert!((num(sim, "fidelity") - 1.0).abs() < 1e-9);
    assert!((num(sim, "success_probability") - num(&v, "success_probability_analytic")).abs() < 1e-12);
}

#[test]
fn toffoli_zero_phase_is_lossless() {
    let v = json(&lopt(&["toffoli", "--qubits", "3", "--phase", "0", "--simulate"]));
    assert_eq!(num(&v, "success_probability_analytic"), 1.0);
    assert!((num(&v["simulated"], "success_probability") - 1.0).abs() < 1e-12);
}

#[test]
fn toffoli_t1_override_is_suboptimal() {
    let best = json(&lopt(&["toffoli", "--qubits", "2", "--phase", "pi"]));
    let off = json(&lopt(&["toffoli", "--qubits", "2", "--phase", "pi", "--t1", "0.3"]));
    let (p_best, p_off) = (
        num(&best, "success_probability_analytic"),
        num(&off, "success_probability_analytic"),
    );
    assert!(p_off < p_best);
    // c = (4 sin²(π/2))^{1/2} = 2, so T2 = 0.7/(0.7 + 2·0.3)
    let t2: f64 = 0.7 / (0.7 + 2.0 * 0.3);
    assert!((p_off - (0.3 * t2).powi(2)).abs() < 1e-11);
}

#[test]
fn toffoli_usage_errors() {
    assert_eq!(code(&lopt(&["toffoli", "--qubits", "3", "--phase", "banana"])), 2);
    assert_eq!(code(&lopt(&["toffoli", "--qubits", "5", "--phase", "pi", "--simulate"])), 2);
    assert_eq!(code(&lopt(&["toffoli", "--qubits", "0", "--phase", "pi"])), 2);
    assert_eq!(code(&lopt(&["toffoli", "--qubits", "2", "--phase", "pi", "--t1", "1.5"])), 2);
    assert_eq!(code(&lopt(&["toffoli", "--phase", "pi"])), 2);
    assert_eq!(code(&lopt(&["nonsense"])), 2);
}

#[test]
fn negative_phase_argument() {
    let v = json(&lopt(&["toffoli", "--qubits", "2", "--phase", "-pi/2", "--simulate"]));
    let phase = num(&v["simulated"], "conditional_phase");
    assert!((phase + std::f64::consts::FRAC_PI_2).abs() < 1e-9);
}

#[test]
fn controlled_u_of_pauli_x() {
    let out = lopt(&[
        "controlled-u",
        "--matrix",
        r#"{"re": [[0, 1], [1, 0]], "im": [[0, 0], [0, 0]]}"#,
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(num(&v, "reconstruction_error") < 1e-10);
    assert!((num(&v, "delta_phi") - std::f64::consts::PI).abs() < 1e-10);
    assert_eq!(code(&lopt(&["controlled-u", "--matrix", "[1, 2]"])), 2);
    assert_eq!(
        code(&lopt(&["controlled-u", "--matrix", r#"{"re": [[1, 1], [0, 1]], "im": [[0, 0], [0, 0]]}"#])),
        2
    );
}

#[test]
fn fredkin_analytic_then_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.json");
    let sol_s = sol.to_str().unwrap();
    let out = lopt(&["fredkin", "analytic", "--output", sol_s]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((num(&v, "q") - 0.0638).abs() < 1e-3);
    assert!((num(&v["reference"], "five_two_qubit_gates") - 1.0 / 1024.0).abs() < 1e-15);

    let out = lopt(&["fredkin", "simulate", "--solution", sol_s]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(num(&v, "min_fidelity") > 1.0 - 1e-8);
    assert_eq!(v["runs"].as_array().unwrap().len(), 9);

    // a solution whose q no longer matches its rows is rejected
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
    doc["q"] = serde_json::json!([0.07, 0.0]);
    doc["P_succ"] = serde_json::json!(0.07f64.powi(4) / 4.0);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, doc.to_string()).unwrap();
    assert_eq!(code(&lopt(&["fredkin", "simulate", "--solution", bad.to_str().unwrap()])), 1);
}

#[test]
fn fredkin_simulate_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("broken.json");
    fs::write(&p, "{\"u1\": 3").unwrap();
    assert_eq!(code(&lopt(&["fredkin", "simulate", "--solution", p.to_str().unwrap()])), 2);
    assert_eq!(code(&lopt(&["fredkin", "simulate", "--solution", "/nonexistent/x.json"])), 2);
}

fn optimize_small(dir: &Path, tag: &str, extra: &[&str]) -> (Value, String, String) {
    let sol = dir.join(format!("{tag}.json"));
    let log = dir.join(format!("{tag}.csv"));
    let mut args = vec![
        "fredkin",
        "optimize",
        "--starts",
        "3",
        "--seed",
        "7",
        "--budget",
        "120",
        "--output",
        sol.to_str().unwrap(),
        "--log",
        log.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let out = lopt(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    (json(&out), fs::read_to_string(sol).unwrap(), fs::read_to_string(log).unwrap())
}

#[test]
fn fredkin_optimize_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (v, sol_a, log) = optimize_small(dir.path(), "a", &[]);
    let (_, sol_b, _) = optimize_small(dir.path(), "b", &["--jobs", "2"]);
    assert_eq!(sol_a, sol_b);
    assert!(num(&v, "P_succ") > 0.0);
    assert_eq!(v["config"]["seed"], 7);
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines[0], "start,q,evaluations,wall_seconds,skipped");
    assert_eq!(lines.len(), 4);
}

#[test]
fn config_file_and_seed_variable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lopt.toml");
    fs::write(&cfg, "[optimizer]\nstarts = 2\nseed = 11\nbudget_seconds = 60\n").unwrap();
    let out = lopt(&["--config", cfg.to_str().unwrap(), "fredkin", "optimize"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["config"]["starts"], 2);
    assert_eq!(v["config"]["seed"], 11);

    let out = Command::new(env!("CARGO_BIN_EXE_lopt"))
        .args(["--config", cfg.to_str().unwrap(), "fredkin", "optimize"])
        .env("LOPT_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(json(&out)["config"]["seed"], 99);

    let out = Command::new(env!("CARGO_BIN_EXE_lopt"))
        .args(["fredkin", "analytic"])
        .env("LOPT_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    fs::write(&cfg, "[optimizer]\nstartz = 2\n").unwrap();
    assert_eq!(code(&lopt(&["--config", cfg.to_str().unwrap(), "fredkin", "analytic"])), 2);
    fs::write(&cfg, "[optimizer]\nstarts = 0\n").unwrap();
    assert_eq!(code(&lopt(&["--config", cfg.to_str().unwrap(), "fredkin", "analytic"])), 2);
}

#[test]
fn complete_feasible_and_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("block.json");
    let ok = r#"{"rows": 4, "cols": 3,
        "re": [[0.5, 0, 0], [0, 0.5, 0], [0, 0, 0.5], [0.3, 0.3, 0.3]],
        "im": [[0, 0, 0], [0, 0, 0], [0, 0, 0], [0, 0, 0]]}"#;
    fs::write(&p, ok).unwrap();
    let out = lopt(&["complete", "--input", p.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["embeddable"], true);
    assert!(num(&v, "deviation") < 1e-10);
    assert_eq!(v["unitary"]["rows"], 7);

    fs::write(&p, ok.replace("0.5, 0, 0]", "1.1, 0, 0]")).unwrap();
    let out = lopt(&["complete", "--input", p.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["embeddable"], false);

    fs::write(&p, r#"{"rows": 3, "cols": 3, "re": [], "im": []}"#).unwrap();
    assert_eq!(code(&lopt(&["complete", "--input", p.to_str().unwrap()])), 2);
}

#[test]
fn verify_subset_and_filter_errors() {
    let out = lopt(&["verify", "--only", "toffoli"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let ids: Vec<&str> = v["claims"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["toffoli-n3", "transmittance-law", "general-phase"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS"));

    let out = lopt(&["verify", "--only", "permanent", "--only", "completion"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["claims"].as_array().unwrap().len(), 2);

    assert_eq!(code(&lopt(&["verify", "--only", "no-such-claim"])), 2);
}
