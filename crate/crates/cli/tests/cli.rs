use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn mindisc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mindisc"))
        .args(args)
        .current_dir(dir)
        .env_remove("MINDISC_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn assert_valid(file: &Path, schema: &str) {
    let schema: Value = serde_json::from_str(&fs::read_to_string(schema_dir().join(schema)).unwrap()).unwrap();
    let value: Value = serde_json::from_str(&fs::read_to_string(file).unwrap()).unwrap();
    let v = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = v.iter_errors(&value).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{}: {errors:?}", file.display());
}

const PROBLEM: &str = r#"{
  "rings": 5,
  "target": {"kind": "normed", "dim": 2, "ball": "euclidean"},
  "boundary": "circle",
  "mu": "busemann_hausdorff"
}"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn sup_norm_jacobians() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "sup.json", r#"{"kind":"polygonal","vertices":[[1,1],[-1,1],[-1,-1],[1,-1]]}"#);
    let o = mindisc(&["areas", "--norm", "sup.json", "--mu", "all"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kind,jacobian"));
    let expected = [("busemann_hausdorff", PI / 4.0), ("holmes_thompson", 2.0 / PI), ("inscribed_riemannian", 1.0)];
    for (line, (name, value)) in lines.zip(expected) {
        let (k, v) = line.split_once(',').unwrap();
        assert_eq!(k, name);
        assert!((v.parse::<f64>().unwrap() - value).abs() < 1e-9, "{line}");
    }
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn unknown_flag_prints_usage_and_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mindisc(&["solve", "--bogus"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage:"), "{}", stderr(&o));
    let o = mindisc(&["frobnicate"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_inputs_exit_1_with_location() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "p.json", "{\n  \"rings\": 5,\n  \"mu\": \"busemann_hausdorff\",\n  \"extra\": 1\n}\n");
    let o = mindisc(&["solve", "p.json", "-o", "out"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
    write(tmp.path(), "n.json", r#"{"kind":"polygonal","vertices":[[1,1],[-1,1],[-1,-1],[1,-1]]}"#);
    let o = mindisc(&["areas", "--norm", "n.json", "--mu", "lebesgue"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("lebesgue"));
    let o = mindisc(&["fill", "n.json", "--eta", "1.5"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solve_and_analyze_write_valid_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write(dir, "p.json", PROBLEM);
    let o = mindisc(&["solve", "p.json", "-o", "s", "--svg"], dir);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = dir.join("s");
    assert_valid(&s.join("solution.json"), "solution.schema.json");
    assert_valid(&s.join("meta.json"), "meta.schema.json");
    assert!(fs::read_to_string(s.join("trace.csv")).unwrap().starts_with("iteration,stage,"));
    assert!(fs::read_to_string(s.join("trace.svg")).unwrap().starts_with("<svg"));

    let cfg = write(dir, "cfg.json", r#"{"voronoi_n": [2, 4]}"#);
    let o = mindisc(&["analyze", "s", "--config", cfg.to_str().unwrap(), "--svg"], dir);
    let report: Value = serde_json::from_str(&fs::read_to_string(s.join("report.json")).unwrap()).unwrap();
    let all_pass = report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == Value::Bool(true));
    assert_eq!(o.status.code(), Some(if all_pass { 0 } else { 2 }), "{}", stderr(&o));
    assert_valid(&s.join("report.json"), "report.schema.json");
    assert_valid(&s.join("z_space.json"), "z_space.schema.json");
    assert_eq!(fs::read_to_string(s.join("report.csv")).unwrap().lines().count(), 12);
    for f in ["levels.svg", "voronoi_n2.svg", "voronoi_n4.svg"] {
        assert!(fs::read_to_string(s.join(f)).unwrap().trim_end().ends_with("</svg>"), "{f}");
    }

    // a failing check turns into exit code 2: the flat disc is far from
    // the growth of a space with the smallest admissible constant
    let strict = write(dir, "strict.json", r#"{"c": 0.0397887357729738, "slack": {"iso": 0.0}}"#);
    let o = mindisc(&["analyze", "s", "--checks", "iso,growth", "--config", strict.to_str().unwrap(), "-o", "a2"], dir);
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.join("a2/report.json")).unwrap()).unwrap();
    let any_fail = report["checks"].as_array().unwrap().iter().any(|c| c["pass"] == Value::Bool(false));
    assert!(any_fail, "{report}");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reruns_and_thread_counts_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write(dir, "p.json", PROBLEM);
    for (out, threads) in [("a", "1"), ("b", "4"), ("c", "4")] {
        let o = mindisc(&["solve", "p.json", "-o", out, "--threads", threads], dir);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        mindisc(&["analyze", out, "--threads", threads], dir);
    }
    let o = Command::new(env!("CARGO_BIN_EXE_mindisc"))
        .args(["solve", "p.json", "-o", "d"])
        .current_dir(dir)
        .env("MINDISC_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.join("d/meta.json")).unwrap()).unwrap();
    assert_eq!(meta["threads"], 2);
    for f in ["solution.json", "trace.csv", "report.json", "report.csv", "z_space.json", "z_dist.csv"] {
        let a = fs::read(dir.join("a").join(f)).unwrap();
        assert_eq!(a, fs::read(dir.join("b").join(f)).unwrap(), "{f}");
        assert_eq!(a, fs::read(dir.join("c").join(f)).unwrap(), "{f}");
    }
    assert_eq!(fs::read(dir.join("a/solution.json")).unwrap(), fs::read(dir.join("d/solution.json")).unwrap());
}

#[test]
fn fill_from_a_distance_matrix() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    // chord distances of 12 equispaced points on the unit circle
    let m = 12;
    let mut csv = String::new();
    for i in 0..m {
        let row: Vec<String> = (0..m)
            .map(|j| format!("{:.17e}", 2.0 * (PI * (i as f64 - j as f64) / m as f64).sin().abs()))
            .collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    write(dir, "c.csv", &csv);
    let o = mindisc(&["fill", "c.csv", "--mu", "busemann_hausdorff", "-o", "f"], dir);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let path = dir.join("f/fill_report.json");
    assert_valid(&path, "fill_report.schema.json");
    let r: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let length = 12.0 * 2.0 * (PI / 12.0).sin();
    assert!((r["length"].as_f64().unwrap() - length).abs() < 1e-12);
    let area = r["area"].as_f64().unwrap();
    // between the inscribed polygon and the isoperimetric bound
    assert!(area > 3.0 && area <= length * length / (2.0 * PI) * 1.1, "{area}");
    assert_eq!(r["rings"], 2);
    assert_eq!(r["samples"], 12);
    assert!(!r["trace"].as_array().unwrap().is_empty());
}

#[test]
fn fixtures_write_reports_and_print_the_table() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let o = mindisc(&["fixtures", "--rings", "6", "--only", "flat", "-o", "out"], dir);
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().starts_with("fixture"), "{text}");
    assert!(text.lines().nth(1).unwrap().starts_with("flat"), "{text}");
    let out = dir.join("out/flat");
    assert_valid(&out.join("report.json"), "report.schema.json");
    assert_valid(&out.join("solution.json"), "solution.schema.json");
    assert_valid(&out.join("check_config.json"), "check_config.schema.json");
    assert_valid(&dir.join("out/meta.json"), "meta.schema.json");
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let all_pass = report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == Value::Bool(true));
    assert_eq!(o.status.code(), Some(if all_pass { 0 } else { 2 }), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.join("out/fixtures.csv")).unwrap();
    assert!(csv.starts_with("fixture,rings,area,expected,rel_err,passed,checks,failed\nflat,6,"), "{csv}");
    let o = mindisc(&["fixtures", "--only", "moebius", "-o", "out"], dir);
    assert_eq!(o.status.code(), Some(1));
}
