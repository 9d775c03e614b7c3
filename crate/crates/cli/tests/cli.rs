use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fmo_gks::circuit::{published, verify_equiv, Circuit};
use fmo_gks::trajectory::Trajectory;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fmo-gks"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn model(dir: &TempDir, name: &str, diss: [f64; 7], deph: [f64; 7], extra: &str) -> PathBuf {
    let path = dir.path().join(name);
    let text = format!(
        r#"{{"dim": 8, "dissipative_rates": {diss:?}, "dephasing_rates": {deph:?},
            "initial_state": {{"type": "site", "index": 1}}{extra}}}"#
    );
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn decompose_dissipative_preset() {
    let dir = TempDir::new().unwrap();
    let m = model(&dir, "m.json", [0.5; 7], [0.0; 7], "");
    let out = dir.path().join("r.json");
    let o = run(&["decompose", s(&m), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let gens = report["generators"].as_array().unwrap();
    assert_eq!(gens.len(), 7);
    for g in gens {
        assert!((g["lambda"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!((g["theta"].as_f64().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }
    assert_eq!(report["gks_nonzero"].as_array().unwrap().len(), 28);

    let again = dir.path().join("r2.json");
    assert!(run(&["decompose", s(&m), "--out", s(&again)]).status.success());
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn decompose_zero_rates() {
    let dir = TempDir::new().unwrap();
    let m = model(&dir, "z.json", [0.0; 7], [0.0; 7], "");
    let o = run(&["decompose", s(&m)]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(report["generators"].as_array().unwrap().is_empty());
    assert!(report["gks_nonzero"].as_array().unwrap().is_empty());
}

#[test]
fn mixed_generator_count_is_rank() {
    let dir = TempDir::new().unwrap();
    let m = model(&dir, "x.json", [0.5; 7], [0.3; 7], "");
    let o = run(&["decompose", s(&m)]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    // Seven decay channels plus the seven nonzero dephasing directions.
    assert_eq!(report["generators"].as_array().unwrap().len(), 14);
}

#[test]
fn parse_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n \"dim\": 8,\n \"dissipative_rates\": [1, 2\n}").unwrap();
    let o = run(&["decompose", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    let wrong_dim = dir.path().join("dim.json");
    std::fs::write(
        &wrong_dim,
        r#"{"dim": 4, "dissipative_rates": [0,0,0,0,0,0,0], "dephasing_rates": [0,0,0,0,0,0,0],
            "initial_state": {"type": "ground"}}"#,
    )
    .unwrap();
    let o = run(&["simulate", s(&wrong_dim)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`dim`"));

    let negative = model(&dir, "neg.json", [0.5, -0.1, 0.0, 0.0, 0.0, 0.0, 0.0], [0.0; 7], "");
    let o = run(&["verify", s(&negative)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dissipative_rates"));
}

#[test]
fn corrupted_gks_exits_3() {
    let dir = TempDir::new().unwrap();
    let m = model(&dir, "c.json", [0.5; 7], [0.0; 7], r#", "gks_entries": [[1, 1, -0.5, 0.0]]"#);
    assert_eq!(run(&["verify", s(&m)]).status.code(), Some(3));
    assert_eq!(run(&["decompose", s(&m)]).status.code(), Some(3));
}

#[test]
fn simulate_analytic_decay() {
    let dir = TempDir::new().unwrap();
    let m = model(&dir, "d.json", [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], [0.0; 7], "");
    let out = dir.path().join("t.csv");
    let t = (2f64.ln() / 2.0).to_string();
    for method in ["exact", "rk4", "trotter"] {
        let o = run(&["simulate", s(&m), "--t", &t, "--steps", "4", "--method", method, "--out", s(&out)]);
        assert!(o.status.success(), "{method}: {}", stderr(&o));
        let traj = Trajectory::from_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(traj.rows.len(), 5);
        let last = traj.rows.last().unwrap();
        assert!((last.populations[1] - 0.5).abs() < 1e-8, "{method}: {}", last.populations[1]);
        if method != "exact" {
            assert!(stderr(&o).contains("max row discrepancy vs exact"));
        }
    }
}

#[test]
fn simulate_at_time_zero() {
    let dir = TempDir::new().unwrap();
    let m = model(&dir, "d.json", [0.5; 7], [0.3; 7], "");
    let o = run(&["simulate", s(&m), "--t", "0"]);
    assert!(o.status.success());
    let traj = Trajectory::from_csv(&stdout(&o)).unwrap();
    assert_eq!(traj.rows.len(), 1);
    assert_eq!(traj.rows[0].populations[1], 1.0);
    assert_eq!(traj.rows[0].populations.iter().sum::<f64>(), 1.0);
}

#[test]
fn simulate_rejects_unknown_method() {
    let dir = TempDir::new().unwrap();
    let m = model(&dir, "d.json", [0.5; 7], [0.0; 7], "");
    assert_eq!(run(&["simulate", s(&m), "--method", "euler"]).status.code(), Some(4));
}

#[test]
fn verify_presets() {
    let dir = TempDir::new().unwrap();
    for (name, diss, deph) in [("a.json", [0.5; 7], [0.0; 7]), ("b.json", [0.0; 7], [0.3; 7])] {
        let m = model(&dir, name, diss, deph, "");
        let o = run(&["verify", s(&m)]);
        assert!(o.status.success(), "{}", stdout(&o));
        assert!(stdout(&o).contains("status: OK"));
    }
}

#[test]
fn verify_zero_rates_is_exact() {
    let dir = TempDir::new().unwrap();
    let m = model(&dir, "z.json", [0.0; 7], [0.0; 7], "");
    let o = run(&["verify", s(&m)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("worst residual 0.000e0"), "{}", stdout(&o));
}

#[test]
fn synth_round_trips() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("c.qasm");
    let o = run(&["synth", "--target", "eq16", "--out", s(&out)]);
    assert!(o.status.success());
    let circ = Circuit::from_qasm(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(verify_equiv(&circ, &published::dissipative_frame_unitary()) < 1e-10);
    assert!(circ.len() <= 200);

    let o = run(&["synth", "--target", "identity", "--out", s(&out)]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&out).unwrap().is_empty());

    let o = run(&["synth", "--target", "derived:3", "--lower", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn synth_published_circuits() {
    let o = run(&["synth", "--target", "fig1-drawn"]);
    assert!(o.status.success());
    let circ = Circuit::from_qasm(&stdout(&o)).unwrap();
    assert_eq!(circ, published::dissipative_circuit_drawn());
    assert!(stderr(&o).contains("distance to target matrix"));
    for target in ["fig1-prose", "fig2-drawn", "fig2-prose"] {
        assert!(run(&["synth", "--target", target]).status.success());
    }
}

#[test]
fn synth_errors() {
    assert_eq!(run(&["synth", "--target", "eq99"]).status.code(), Some(4));
    assert_eq!(run(&["synth", "--target", "derived:99"]).status.code(), Some(4));
    // The printed dephasing frame matrix is not unitary.
    assert_eq!(run(&["synth", "--target", "eq24"]).status.code(), Some(3));
}

#[test]
fn published_claims_report() {
    let o = run(&["paper-check"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("summary:"));
    for line in text.lines().filter(|l| l.contains(" dissipative-gks/")) {
        assert!(line.starts_with("MATCH"), "{line}");
    }
    let o = run(&["paper-check", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["items"].as_array().unwrap().len() > 100);
}
