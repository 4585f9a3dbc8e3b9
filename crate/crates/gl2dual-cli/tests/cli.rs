use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gl2dual")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn gauss_suite_passes() {
    let out = run(&["verify", "example2f1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["suite"], "example2f1");
    let results = report["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    for case in results {
        assert!(case["residual"].as_f64().unwrap() <= 1e-6);
        assert_eq!(case["passed"], true);
    }
}

#[test]
fn zero_dimensional_eval_is_one() {
    let out = run(&["eval", "I", "--m2", "2", "--l2", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["value"][0].as_f64(), Some(1.0));
    assert_eq!(v["value"][1].as_f64(), Some(0.0));
}

#[test]
fn malformed_config_exits_2_without_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "suite = selberg\nkappa 1.3\n").unwrap();
    let report = dir.path().join("report.json");
    let out = run(&["verify", "--config", cfg.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!report.exists());

    let out = run(&["verify", "selberg", "--kappa", "-1", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!report.exists());
}

#[test]
fn config_file_selects_the_suite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# selberg closed forms\nsuite = selberg\nrel_tol = 1e-10\n").unwrap();
    let out = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["suite"], "selberg");
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let strip = |mut v: Value| {
        v["wall_time"] = Value::Null;
        v
    };
    let a = strip(json(&run(&["verify", "operators", "--seed", "11"])));
    let b = strip(json(&run(&["verify", "operators", "--seed", "11"])));
    assert_eq!(a, b);
}

#[test]
fn csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let out = run(&["verify", "selberg", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,residual,threshold,passed"));
    assert_eq!(lines.filter(|l| l.ends_with(",true")).count(), 4);
}

#[test]
fn failing_case_exits_1() {
    // Im mu outside (0, 2 pi) makes every identity case fail to evaluate
    let out = run(&["verify", "theorem1", "--m2", "1", "--l2", "1", "--mu=-0.8-1.3i"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert!(report["results"].as_array().unwrap().iter().all(|c| c["passed"] == false));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

fn variables(dump: &Value) -> usize {
    let segs = dump["segments"].as_array().unwrap();
    segs.iter().map(|s| s["var"].as_u64().unwrap()).max().map_or(0, |m| m as usize + 1)
}

#[test]
fn contour_dumps() {
    let barnes = json(&run(&["dump-contour", "barnes", "--m2", "2", "--l2", "2"]));
    assert_eq!(barnes["family"], "Barnes");
    assert_eq!(variables(&barnes), 2);
    assert!(barnes.get("poles").is_some());
    let loops = json(&run(&["dump-contour", "loops-j", "--m2", "2", "--l2", "1", "--b", "1"]));
    assert_eq!(variables(&loops), 2);
    let hankel = json(&run(&["dump-contour", "loops-b", "--m2", "3"]));
    assert_eq!(variables(&hankel), 3);
    // every loop has an arc and a ray on each of its two legs
    assert_eq!(hankel["segments"].as_array().unwrap().len(), 12);
}
