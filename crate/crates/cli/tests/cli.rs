use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_minsurf")).args(args).output().expect("binary runs");
    let report: Value = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)));
    (out.status.code().unwrap_or(-1), report)
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no check {name}"))
}

fn keys(r: &Value) -> Vec<String> {
    let mut k: Vec<String> = r.as_object().unwrap().keys().cloned().collect();
    k.sort();
    k
}

#[test]
fn check_first_family_member() {
    let (code, r) = run(&["check", "r1:a1=1,i1=500"]);
    assert_eq!(code, 0, "{r:#}");
    for name in ["minimal", "isothermal", "system", "system_exact"] {
        assert_eq!(check(&r, name)["passed"], true, "{name}");
    }
}

#[test]
fn check_catenoid_and_non_minimal_chart() {
    let (code, r) = run(&["check", "weierstrass:f=exp(z),g=exp(-z)"]);
    assert_eq!(code, 0);
    assert_eq!(check(&r, "minimal")["passed"], true);

    let (code, r) = run(&["check", "chart:x=u,y=v,z=u^2"]);
    assert_eq!(code, 1);
    assert_eq!(check(&r, "minimal")["passed"], false);
    assert_eq!(r["passed"], false);
}

#[test]
fn congruence_examples() {
    let (code, r) = run(&["congruent", "r1:a1=1,i1=500", "assoc:a1=1,i1=500,t=1"]);
    assert_eq!(code, 0);
    assert_eq!(r["decision"]["congruent"], true);
    assert!((r["decision"]["rotation_angle"].as_f64().unwrap() - 0.5).abs() < 1e-6);

    let (code, r) = run(&["congruent", "s1:a1=1,c3=1", "s2:a2=-1,d3=1"]);
    assert_eq!(code, 0);
    assert_eq!(r["decision"]["congruent"], true);

    let (code, r) = run(&["congruent", "r1:a1=1,i1=500", "s1:a1=1,c3=1", "--homothety"]);
    assert_eq!(code, 1);
    assert_eq!(r["decision"]["congruent"], false);
}

#[test]
fn hint_fixes_the_rotation() {
    let (code, r) = run(&["congruent", "s2:a2=-1,d3=1", "s1:a1=1,c3=1", "--hint", "i*z"]);
    assert_eq!(code, 0);
    let angle = r["decision"]["third_axis_angle"].as_f64().unwrap();
    assert!((angle - std::f64::consts::FRAC_PI_2).abs() < 1e-6, "{angle}");
}

#[test]
fn export_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.obj");
    let b = dir.path().join("b.obj");
    for p in [&a, &b] {
        let (code, r) = run(&["export", "r1:a1=1,i1=500", "--range=-4,4", "--grid", "11x9", "--out", p.to_str().unwrap()]);
        assert_eq!(code, 0, "{r:#}");
        assert_eq!(r["outputs"][0], p.to_str().unwrap());
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 99);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 2 * 10 * 8);
}

#[test]
fn export_plane_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("plane.obj");
    let (code, _) = run(&["export", "chart:x=u,y=v,z=0", "--out", obj.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&obj).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("v ")).all(|l| l.split_whitespace().nth(3).unwrap().parse::<f64>().unwrap() == 0.0));

    let csv = dir.path().join("s1.dat");
    let (code, _) = run(&["export", "s1:a1=3,c3=1", "--range=-0.1,0.1", "--format", "csv", "--out", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("u,v,E,F,G,K,H,nu"));
    assert_eq!(text.lines().count(), 1 + 21 * 21);
}

#[test]
fn canonical_ganchev_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nu.csv");
    let (code, r) = run(&["canonical", "weierstrass:f=-1/(2*z),g=z^2,z0=1", "--z0", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{r:#}");
    assert!(check(&r, "pde_residual")["value"].as_f64().unwrap() <= 1e-5);
    assert!(Path::new(&out).exists());
}

#[test]
fn assoc_keeps_the_metric() {
    let (code, r) = run(&["assoc", "r1:a1=1,i1=500", "--t", "1"]);
    assert_eq!(code, 0, "{r:#}");
    assert!(check(&r, "metric_deviation")["value"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn config_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"grid": "9x9", "range": "-2,2", "tolerances": {"minimal": 1e-3}}"#).unwrap();
    let json = dir.path().join("report.json");
    let (code, r) = run(&["check", "r2:a2=1,i2=2", "--config", cfg.to_str().unwrap(), "--grid", "5x7", "--tol", "isothermal=1e-6", "--json", json.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(r["inputs"]["grid"]["nu"], 5);
    assert_eq!(r["inputs"]["grid"]["nv"], 7);
    assert_eq!(r["inputs"]["grid"]["u"][0], -2.0);
    assert_eq!(check(&r, "minimal")["tolerance"], 1e-3);
    assert_eq!(check(&r, "isothermal")["tolerance"], 1e-6);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(saved["checks"], r["checks"]);
}

#[test]
fn errors_still_emit_a_report() {
    let (code, r) = run(&["check", "r1:a1=1"]);
    assert_eq!(code, 2);
    assert_eq!(r["passed"], false);
    assert!(r["error"].as_str().unwrap().contains("i1"));

    let (code, ok) = run(&["check", "r1:a1=1,i1=2"]);
    assert_eq!(code, 0);
    assert_eq!(keys(&r), keys(&ok));

    let (code, r) = run(&["check", "r1:a1=1,i1=2", "--tol", "bogus=1"]);
    assert_eq!(code, 2);
    assert!(r["error"].as_str().unwrap().contains("bogus"));
}

#[test]
fn spec_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("surface.json");
    std::fs::write(&p, r#"{"family": {"name": "s", "params": {"a1": 1, "a2": 0.5, "c3": 1, "d3": 0.2}}}"#).unwrap();
    let (code, r) = run(&["check", &format!("@{}", p.display())]);
    assert_eq!(code, 0, "{r:#}");
    assert_eq!(r["inputs"]["surface"]["family"]["name"], "s");
}
