use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_qgc");
const HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn qgc(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("QGC_SEED").output().unwrap()
}

fn ok_stdout(out: Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn ok_json(out: Output) -> Value {
    serde_json::from_str(&ok_stdout(out)).unwrap()
}

fn error_json(out: Output) -> Value {
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap()
}

struct Workspace(TempDir);

impl Workspace {
    fn new() -> Self {
        Workspace(TempDir::new().unwrap())
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.0.path().join(name);
        std::fs::write(&p, contents).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn zero_and_plus(ws: &Workspace) -> (PathBuf, PathBuf) {
    (
        ws.file("zero.json", r#"{"amplitudes_re":[1,0]}"#),
        ws.file("plus.json", &format!(r#"{{"amplitudes_re":[{HALF},{HALF}]}}"#)),
    )
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn qubit_sweep_matches_golden() {
    let out = ok_stdout(qgc(&["qubit-sweep", "--theta-steps", "5", "--phi-steps", "2"]));
    assert_eq!(out, golden("qubit_sweep_5x2.csv"));
    for line in out.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[2] - (cols[0].to_radians() / 2.0).cos().powi(2)).abs() <= 1e-11);
    }
}

#[test]
fn qubit_sweep_full_grid_to_file() {
    let ws = Workspace::new();
    let path = ws.path("sweep.csv");
    ok_stdout(qgc(&["qubit-sweep", "--projector", "1", "--radians", "-o", s(&path)]));
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 1 + 181 * 36);
    for line in &rows[1..] {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[2] - (cols[0] / 2.0).sin().powi(2)).abs() <= 1e-11);
    }
}

#[test]
fn mixed_sweep_matches_golden() {
    assert_eq!(ok_stdout(qgc(&["mixed-sweep", "--r-steps", "3", "--angle-steps", "3"])), golden("mixed_sweep_3x3.csv"));
}

#[test]
fn mixed_sweep_accepts_bloch_effect() {
    let ws = Workspace::new();
    let e = ws.file("e.json", r#"{"alpha":0.5,"e":[0,0,-0.5]}"#);
    let out = ok_stdout(qgc(&["mixed-sweep", "--r-steps", "2", "--angle-steps", "2", "--effect", s(&e)]));
    assert_eq!(out, "r,angle,membership\n0,0,0.5\n0,180,0.5\n1,0,0\n1,180,1\n");
}

#[test]
fn helstrom_matches_golden() {
    let ws = Workspace::new();
    let (zero, plus) = zero_and_plus(&ws);
    let out = ok_stdout(qgc(&["helstrom", "--rho0", s(&zero), "--rho1", s(&plus)]));
    assert_eq!(out, golden("helstrom_zero_plus.json"));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((f(&v["optimal_value"]) - 0.853553390593).abs() < 1e-12);
}

#[test]
fn helstrom_probe_and_priors() {
    let ws = Workspace::new();
    let (zero, plus) = zero_and_plus(&ws);
    let v = ok_json(qgc(&["helstrom", "--rho0", s(&zero), "--rho1", s(&plus), "--probe", s(&plus)]));
    assert!((f(&v["mu0"]) - 0.146446609407).abs() < 1e-12);
    let v = ok_json(qgc(&["helstrom", "--rho0", s(&zero), "--rho1", s(&plus), "--pi0", "0.75"]));
    let expected = 0.5 * (1.0 + (1.0f64 - 4.0 * 0.75 * 0.25 * 0.5).sqrt());
    assert!((f(&v["optimal_value"]) - expected).abs() < 1e-11);
    let v = error_json(qgc(&["helstrom", "--rho0", s(&zero), "--rho1", s(&plus), "--pi0", "0.7", "--pi1", "0.7"]));
    assert_eq!(v["error"], "invalid_priors");
}

#[test]
fn parity_of_bell_and_basis_states() {
    let ws = Workspace::new();
    let bell = ws.file("bell.json", &format!(r#"{{"amplitudes_re":[{HALF},0,0,{HALF}]}}"#));
    let v = ok_json(qgc(&["parity", "--state", s(&bell)]));
    assert_eq!((f(&v["p_even"]), f(&v["p_odd"]), f(&v["p_any"])), (1.0, 0.0, 1.0));
    let odd = ws.file("01.json", r#"{"dim":4,"re":[[0,0,0,0],[0,1,0,0],[0,0,0,0],[0,0,0,0]]}"#);
    let v = ok_json(qgc(&["parity", "--state", s(&odd)]));
    assert_eq!((f(&v["p_even"]), f(&v["p_odd"])), (0.0, 1.0));
}

#[test]
fn island_check_reports_commutativity() {
    let ws = Workspace::new();
    let diag = ws.file("diag.json", r#"[{"re":[[0.2,0],[0,0.7]]},{"re":[[1,0],[0,0]]}]"#);
    let v = ok_json(qgc(&["island-check", "--effects", s(&diag)]));
    assert_eq!(v["commuting"], Value::Bool(true));
    let mixed = ws.file("mixed.json", r#"[{"alpha":0.5,"e":[0,0,0.5]},{"alpha":0.5,"e":[0.5,0,0]}]"#);
    let v = ok_json(qgc(&["island-check", "--effects", s(&mixed)]));
    assert_eq!(v["commuting"], Value::Bool(false));
    assert!(f(&v["commutator_norm"]) > 0.1);
}

#[test]
fn channel_dress_agrees_for_amplitude_damping() {
    let ws = Workspace::new();
    let g: f64 = 0.3;
    let ch = ws.file(
        "ad.json",
        &format!(
            r#"{{"dim_in":2,"dim_out":2,"kraus":[{{"re":[[1,0],[0,{}]]}},{{"re":[[0,{}],[0,0]]}}]}}"#,
            (1.0 - g).sqrt(),
            g.sqrt()
        ),
    );
    let e = ws.file("e.json", r#"{"re":[[0,0],[0,1]]}"#);
    let (zero, plus) = zero_and_plus(&ws);
    let one = ws.file("one.json", r#"{"amplitudes_re":[0,1]}"#);
    let states = ws.file(
        "states.json",
        &format!("[{},{},{}]", std::fs::read_to_string(&zero).unwrap(), std::fs::read_to_string(&plus).unwrap(), std::fs::read_to_string(&one).unwrap()),
    );
    let v = ok_json(qgc(&["channel-dress", "--channel", s(&ch), "--effect", s(&e), "--states", s(&states)]));
    assert!(f(&v["max_difference"]) <= 1e-12);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!((f(&rows[2]["heisenberg"]) - (1.0 - g)).abs() < 1e-12);
}

#[test]
fn vel_train_writes_report_and_trace() {
    let ws = Workspace::new();
    let data = ws.file("d.csv", "x,label\n0.0,0\n1.0,1\n0.05,0\n0.95,1\n");
    let ansatz = ws.file("a.json", r#"{"qubits":1,"layers":1}"#);
    let trace = ws.path("trace.csv");
    let v = ok_json(qgc(&["vel-train", "--data", s(&data), "--ansatz", s(&ansatz), "--iters", "20", "--trace", s(&trace)]));
    assert_eq!(f(&v["argmax_accuracy"]), 1.0);
    assert!(f(&v["max_completeness_error"]) <= 1e-9);
    let lines = std::fs::read_to_string(&trace).unwrap();
    let mut rows = lines.lines();
    assert_eq!(rows.next(), Some("iteration,best_loss,loss"));
    assert_eq!(rows.count(), v["loss_trace"].as_array().unwrap().len());
}

#[test]
fn vel_train_seed_comes_from_environment() {
    let ws = Workspace::new();
    let data = ws.file("d.csv", "x,label\n0.1,0\n0.8,1\n0.3,0\n0.6,1\n");
    let ansatz = ws.file("a.json", r#"{"qubits":1,"layers":2}"#);
    let args = ["vel-train", "--data", s(&data), "--ansatz", s(&ansatz), "--iters", "5", "--init-scale", "1"];
    let run = |seed: &str| {
        let out = Command::new(BIN).args(args).env("QGC_SEED", seed).output().unwrap();
        ok_json(out)["best_theta"].clone()
    };
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7"), run("8"));
    let flag = ok_json(Command::new(BIN).args(args).args(["--seed", "7"]).env("QGC_SEED", "8").output().unwrap());
    assert_eq!(flag["best_theta"], run("7"));
}

fn helstrom_config(ws: &Workspace, shots: Option<u64>, seed: Option<u64>) -> PathBuf {
    let mut cfg = serde_json::json!({
        "input_mode": "quantum",
        "measurement": {
            "kind": "helstrom",
            "rho0": { "amplitudes_re": [1, 0] },
            "rho1": { "amplitudes_re": [HALF, HALF] }
        },
        "rule": { "kind": "helstrom_binary" }
    });
    if let Some(n) = shots {
        cfg["shots"] = n.into();
    }
    if let Some(n) = seed {
        cfg["seed"] = n.into();
    }
    ws.file("cfg.json", &cfg.to_string())
}

#[test]
fn pipeline_run_exact_quantum_input() {
    let ws = Workspace::new();
    let cfg = helstrom_config(&ws, None, None);
    let (zero, plus) = zero_and_plus(&ws);
    let v = ok_json(qgc(&["pipeline-run", "--config", s(&cfg), "--state", s(&zero)]));
    assert_eq!(v["label"], Value::from(0));
    assert!((f(&v["soft_memberships"]["mu0"]) - 0.853553390593).abs() < 1e-12);
    let v = ok_json(qgc(&["pipeline-run", "--config", s(&cfg), "--state", s(&plus)]));
    assert_eq!(v["label"], Value::from(1));
}

#[test]
fn pipeline_run_classical_row() {
    let ws = Workspace::new();
    let cfg = ws.file(
        "cfg.json",
        r#"{"input_mode":"classical","encoder":"angle",
            "granules":[{"kind":"gaussian","feature":0,"center":1.0,"width":0.5}],
            "measurement":{"kind":"povm","effects":[{"re":[[1,0],[0,0]]},{"re":[[0,0],[0,1]]}]},
            "rule":{"kind":"argmax"}}"#,
    );
    assert_eq!(ok_json(qgc(&["pipeline-run", "--config", s(&cfg), "--row", "1.0"]))["label"], Value::from(1));
    assert_eq!(ok_json(qgc(&["pipeline-run", "--config", s(&cfg), "--row", "-3"]))["label"], Value::from(0));
}

#[test]
fn pipeline_shots_follow_seed_precedence() {
    let ws = Workspace::new();
    let (_, plus) = zero_and_plus(&ws);
    let cfg = helstrom_config(&ws, Some(1000), None);
    let run = |extra: &[&str], env: Option<&str>| {
        let mut c = Command::new(BIN);
        c.args(["pipeline-run", "--config", s(&cfg), "--state", s(&plus)]).args(extra).env_remove("QGC_SEED");
        if let Some(e) = env {
            c.env("QGC_SEED", e);
        }
        ok_json(c.output().unwrap())["shot_record"].clone()
    };
    assert_eq!(run(&[], Some("5")), run(&["--seed", "5"], None));
    assert_eq!(run(&["--seed", "5"], Some("6")), run(&["--seed", "5"], None));
    assert_ne!(run(&[], Some("5")), run(&[], Some("6")));
    assert_eq!(run(&[], None), run(&["--seed", "0"], None));

    let pinned = helstrom_config(&ws, Some(1000), Some(5));
    let mut c = Command::new(BIN);
    c.args(["pipeline-run", "--config", s(&pinned), "--state", s(&plus)]).env("QGC_SEED", "6");
    assert_eq!(ok_json(c.output().unwrap())["shot_record"], run(&["--seed", "5"], None));
}

#[test]
fn pipeline_eval_quantum_states_success_rate() {
    let ws = Workspace::new();
    let cfg = helstrom_config(&ws, Some(10_000), Some(11));
    let items: Vec<Value> = (0..40)
        .map(|k| {
            let state = if k % 2 == 0 { serde_json::json!({"amplitudes_re":[1,0]}) } else { serde_json::json!({"amplitudes_re":[HALF,HALF]}) };
            serde_json::json!({"state": state, "label": k % 2})
        })
        .collect();
    let states = ws.file("states.json", &Value::Array(items).to_string());
    let confusion = ws.path("confusion.csv");
    let v = ok_json(qgc(&["pipeline-eval", "--config", s(&cfg), "--states", s(&states), "--confusion", s(&confusion)]));
    assert!((f(&v["success_rate"]) - 0.853553).abs() <= 0.07);
    assert_eq!(v["examples"], Value::from(40));
    let text = std::fs::read_to_string(&confusion).unwrap();
    assert_eq!(text.lines().next(), Some("true,pred_0,pred_1"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn pipeline_eval_classical_csv() {
    let ws = Workspace::new();
    let cfg = ws.file(
        "cfg.json",
        r#"{"input_mode":"classical","encoder":"angle",
            "granules":[{"kind":"triangular","feature":0,"left":0,"peak":1,"right":2}],
            "measurement":{"kind":"povm","effects":[{"re":[[1,0],[0,0]]},{"re":[[0,0],[0,1]]}]},
            "rule":{"kind":"argmax"}}"#,
    );
    let data = ws.file("d.csv", "x,label\n1.0,1\n0.9,1\n0.0,0\n2.0,0\n");
    let v = ok_json(qgc(&["pipeline-eval", "--config", s(&cfg), "--data", s(&data)]));
    assert_eq!(f(&v["accuracy"]), 1.0);
    assert_eq!(v["confusion"], serde_json::json!([[2, 0], [0, 2]]));
}

#[test]
fn invalid_inputs_report_json_errors() {
    let ws = Workspace::new();
    let bad = ws.file("bad.json", r#"{"amplitudes_re":[0,0]}"#);
    let v = error_json(qgc(&["parity", "--state", s(&bad)]));
    assert!(v["error"].is_string() && v["message"].is_string());

    let garbage = ws.file("g.json", "{not json");
    assert_eq!(error_json(qgc(&["parity", "--state", s(&garbage)]))["error"], "parse");

    let missing = ws.path("absent.json");
    assert_eq!(error_json(qgc(&["parity", "--state", s(&missing)]))["error"], "io");

    let (zero, _) = zero_and_plus(&ws);
    assert_eq!(error_json(qgc(&["parity", "--state", s(&zero)]))["error"], "dimension_mismatch");

    let not_effect = ws.file("ne.json", r#"[{"re":[[2,0],[0,0]]}]"#);
    let v = error_json(qgc(&["island-check", "--effects", s(&not_effect)]));
    assert_ne!(v["error"], "parse");
}

#[test]
fn usage_errors_are_json_and_help_is_not() {
    assert_eq!(error_json(qgc(&["no-such-command"]))["error"], "usage");
    assert_eq!(error_json(qgc(&["qubit-sweep", "--projector", "2"]))["error"], "usage");
    let help = qgc(&["--help"]);
    assert!(help.status.success());
    assert!(String::from_utf8(help.stdout).unwrap().contains("qubit-sweep"));
}

#[test]
fn bad_seed_environment_is_an_error() {
    let ws = Workspace::new();
    let cfg = helstrom_config(&ws, Some(10), None);
    let (zero, _) = zero_and_plus(&ws);
    let out = Command::new(BIN)
        .args(["pipeline-run", "--config", s(&cfg), "--state", s(&zero)])
        .env("QGC_SEED", "abc")
        .output()
        .unwrap();
    assert!(error_json(out)["message"].as_str().unwrap().contains("QGC_SEED"));
}
