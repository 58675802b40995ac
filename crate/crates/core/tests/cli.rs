use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use gradshift::io::to_json;
use gradshift::rules::{build_rule, closed_s2, symmetric_rule, RuleMethod, ShiftRule};
use gradshift::sim::random_hermitian;
use gradshift::spectral::{analyze, GapSet};
use serde_json::Value;

const COS_CIRCUIT: &str = r#"{"generator": "pauli:X", "cost": "pauli:Z"}"#;
const FSIM_CIRCUIT: &str = r#"{
  "pre": "haar:11",
  "generator": "fsim:theta",
  "spectator": {"generator": "fsim:phi", "angle": "0.3pi"},
  "post": "haar:12",
  "cost": "pauli:ZI"
}"#;
const CR_CIRCUIT: &str = r#"{
  "pre": "haar:1",
  "generator": "cr:1,-0.5,1,0,0",
  "post": "haar:2",
  "cost": {"paulis": [{"coeff": 1, "string": "ZI"}, {"coeff": 0.5, "string": "XX"}]}
}"#;

fn gradshift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradshift"))
        .args(args)
        .env_remove("GRADSHIFT_SEED")
        .output()
        .expect("spawn gradshift")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn analyze_catalog_generators() {
    let v = stdout_json(&gradshift(&["analyze", "--generator", "fsim:theta"]));
    assert_eq!(floats(&v["gaps"]), vec![2.0, 4.0]);
    assert_eq!(v["S"], 2);
    assert_eq!(v["S_max"], 6);

    let v = stdout_json(&gradshift(&["analyze", "--generator", "pauli:Z"]));
    assert_eq!(floats(&v["gaps"]), vec![2.0]);
}

#[test]
fn analyze_matches_library_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let op = random_hermitian(5, 99);
    let m = op.matrix();
    let entries: Vec<Vec<[f64; 2]>> = (0..5).map(|i| (0..5).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
    let json = serde_json::json!({"dim": 5, "entries": entries}).to_string();
    let path = write(dir.path(), "h.json", &json);

    let out = gradshift(&["analyze", "--generator", &path]);
    let expected = to_json(&analyze(&gradshift::io::operator_from_json(&json).unwrap()).unwrap()).unwrap() + "\n";
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);
}

#[test]
fn analyze_reports_non_hermitian_input() {
    let out = gradshift(&["analyze", "--generator", r#"{"dim": 2, "entries": [[0, 1], [0, 0]]}"#]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not Hermitian"));
}

#[test]
fn rule_psr_table() {
    let v = stdout_json(&gradshift(&["rule", "--gaps", "2", "--shifts", "pi/2"]));
    let terms = v["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 2);
    let w: Vec<f64> = terms.iter().map(|t| t["weight"].as_f64().unwrap()).collect();
    assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] + 0.5).abs() < 1e-12);
    assert!(v["condition_number"].as_f64().unwrap() >= 1.0);
    assert_eq!(v["chain_factor"], 1.0);
}

#[test]
fn rule_closed_s2_matches_library() {
    let out = gradshift(&["rule", "--gaps", "2,4", "--method", "closed-s2", "--shifts", "0.80pi,0.29pi"]);
    let cli: ShiftRule = serde_json::from_slice(&stdout_json_bytes(&out)).unwrap();
    let lib = closed_s2([2.0, 4.0], [0.80 * PI, 0.29 * PI]).unwrap();
    assert_eq!(cli, lib);
}

#[test]
fn rule_closed_s3_default_shifts() {
    let v = stdout_json(&gradshift(&["rule", "--generator", "cr:1,-0.5,1,0,0", "--method", "closed-s3"]));
    assert_eq!(v["terms"].as_array().unwrap().len(), 6);
    let cli: ShiftRule = serde_json::from_value(v).unwrap();
    let gaps = GapSet::from_values(&[1.0, 3.0, 4.0]).unwrap();
    let general = symmetric_rule(&gaps, &cli.terms.iter().step_by(2).map(|t| t.shift).collect::<Vec<_>>()).unwrap();
    for (a, b) in cli.effective_weights().iter().zip(general.effective_weights()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn rule_point_dependent_needs_x() {
    let v = stdout_json(&gradshift(&["rule", "--gaps", "2", "--method", "triangulation", "--x", "0.3"]));
    let lib =
        build_rule(RuleMethod::TriangulationGeneral, &GapSet::from_values(&[2.0]).unwrap(), None, Some(0.3)).unwrap();
    assert_eq!(serde_json::from_value::<ShiftRule>(v).unwrap(), lib);
}

#[test]
fn singular_shift_exits_3_and_names_shifts() {
    let out = gradshift(&["rule", "--gaps", "2", "--shifts", "pi"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("singular") && err.contains("3.14159"), "{err}");
}

#[test]
fn bad_input_exits_2() {
    assert_eq!(gradshift(&["rule", "--gaps", "two"]).status.code(), Some(2));
    assert_eq!(gradshift(&["analyze", "--generator", "nope:1"]).status.code(), Some(2));
}

#[test]
fn diff_cos_circuit_gives_minus_sine() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(dir.path(), "cos.json", COS_CIRCUIT);
    let v = stdout_json(&gradshift(&["diff", "--circuit", &circuit, "--x", "1.0", "--oracle"]));
    let value = v["value"].as_f64().unwrap();
    assert!((value + 1f64.sin()).abs() < 1e-10, "{value}");
    assert!(v["oracle"]["abs_error_vs_exact"].as_f64().unwrap() < 1e-10);
    assert!(v["oracle"]["abs_error_vs_finite_difference"].as_f64().unwrap() < 1e-6);
    assert!(v.get("warnings").is_none());
}

#[test]
fn diff_shots_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(dir.path(), "fsim.json", FSIM_CIRCUIT);
    let args =
        ["diff", "--circuit", &circuit, "--x", "0.4", "--method", "closed-s2", "--shots", "10000", "--seed", "7"];
    let first = gradshift(&args);
    let second = gradshift(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    let v: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["estimate"]["seed"], 7);
    assert_eq!(v["estimate"]["shots_per_term"], 10000);
    let other = gradshift(&[
        "diff",
        "--circuit",
        &circuit,
        "--x",
        "0.4",
        "--method",
        "closed-s2",
        "--shots",
        "10000",
        "--seed",
        "8",
    ]);
    assert_ne!(first.stdout, other.stdout);
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(dir.path(), "fsim.json", FSIM_CIRCUIT);
    let base = ["diff", "--circuit", circuit.as_str(), "--x", "0.4", "--method", "closed-s2", "--shots", "500"];
    let flag = gradshift(&[&base[..], &["--seed", "21"]].concat());
    let env = Command::new(env!("CARGO_BIN_EXE_gradshift")).args(base).env("GRADSHIFT_SEED", "21").output().unwrap();
    assert!(env.status.success());
    assert_eq!(flag.stdout, env.stdout);
}

#[test]
fn diff_cross_resonance_closed_s3() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(dir.path(), "cr.json", CR_CIRCUIT);
    for x in ["-1.1", "0.3", "2pi/3"] {
        let v =
            stdout_json(&gradshift(&["diff", "--circuit", &circuit, "--x", x, "--method", "closed-s3", "--oracle"]));
        assert!(v["oracle"]["abs_error_vs_exact"].as_f64().unwrap() < 1e-9, "x={x}");
    }
}

#[test]
fn diff_gap_mismatch_is_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(dir.path(), "fsim.json", FSIM_CIRCUIT);
    let v = stdout_json(&gradshift(&["diff", "--circuit", &circuit, "--x", "0.4", "--gaps", "2"]));
    let warnings = v["warnings"].as_array().unwrap();
    assert!(warnings[0].as_str().unwrap().contains("not covered"));
}

#[test]
fn diff_accepts_rule_file() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(dir.path(), "cos.json", COS_CIRCUIT);
    let rule = gradshift(&["rule", "--gaps", "2", "--shifts", "pi/3"]);
    let rule_path = write(dir.path(), "rule.json", &String::from_utf8(stdout_json_bytes(&rule)).unwrap());
    let v = stdout_json(&gradshift(&["diff", "--circuit", &circuit, "--x", "1", "--rule", &rule_path]));
    assert!((v["value"].as_f64().unwrap() + 1f64.sin()).abs() < 1e-12);
}

#[test]
fn variance_map_presets() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig3.csv");
    let out = gradshift(&["variance-map", "--preset", "fig3", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("delta1,delta2,variance"));
    assert_eq!(text.lines().count(), 1 + 201 * 201);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig3.json")).unwrap()).unwrap();
    assert!((summary["min"].as_f64().unwrap() - 1.40).abs() < 0.01);
    let argmin = floats(&summary["argmin"]);
    assert!((argmin[0] / PI - 0.80).abs() < 0.02 && (argmin[1] / PI - 0.29).abs() < 0.02, "{argmin:?}");

    let out = gradshift(&["variance-map", "--preset", "fig2a"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("delta,variance"));
    let summary: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!((summary["min"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((floats(&summary["argmin"])[0] - PI / 2.0).abs() <= PI / 100.0);
    assert!(text.contains(",inf"));

    let out = gradshift(&["variance-map", "--preset", "fig2b"]);
    let summary: Value = serde_json::from_slice(&out.stderr).unwrap();
    let minimizers = summary["minimizers"].as_array().unwrap();
    assert!(minimizers.len() >= 4);
    let on_ladder = |a: f64| [0.5, 1.5].iter().any(|k| (a.abs() - k * PI).abs() < 1e-9);
    for m in minimizers {
        let p = floats(m);
        assert!(on_ladder(p[0]) && on_ladder(p[1]), "{p:?}");
        assert!(((p[0] - p[1]) / (2.0 * PI)).fract().abs() > 1e-6, "coincident shifts {p:?}");
    }
}

#[test]
fn variance_map_is_deterministic() {
    let args = ["variance-map", "--gaps", "2,4", "--grid", "0:pi:41"];
    let a = gradshift(&args);
    let b = gradshift(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
}

#[test]
fn verify_filter_runs_variance_checks_only() {
    let out = gradshift(&["verify", "--filter", "variance"]);
    let v = stdout_json(&out);
    let ids: Vec<u64> = v["checks"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, vec![7, 8, 9]);
    assert_eq!(v["passed"], true);
}

#[test]
fn verify_detects_closed_s2_sign_mutation() {
    let out = gradshift(&["verify", "--filter", "fsim-theta", "--mutate", "flip-closed-s2-sign"]);
    assert_eq!(out.status.code(), Some(4));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);
}

#[test]
fn verify_rejects_empty_selection() {
    assert_eq!(gradshift(&["verify", "--filter", "no-such-check"]).status.code(), Some(2));
}

fn stdout_json_bytes(out: &Output) -> Vec<u8> {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout.clone()
}
