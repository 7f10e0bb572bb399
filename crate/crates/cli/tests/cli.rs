use serde_json::{json, Value};
use std::path::Path;
use std::process::{Command, Output};

fn spinq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinq")).args(args).output().expect("spinq runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

/// Key/type skeleton of a JSON value. Arrays collapse to the skeleton of
/// their elements, which must all agree.
fn skeleton(v: &Value) -> Value {
    match v {
        Value::Null => json!("null"),
        Value::Bool(_) => json!("bool"),
        Value::Number(_) => json!("number"),
        Value::String(_) => json!("string"),
        Value::Array(items) => {
            let shapes: Vec<Value> = items.iter().map(skeleton).collect();
            if let Some(first) = shapes.first() {
                assert!(shapes.iter().all(|s| s == first), "heterogeneous array elements");
            }
            Value::Array(shapes.into_iter().take(1).collect())
        }
        Value::Object(m) => Value::Object(m.iter().map(|(k, v)| (k.clone(), skeleton(v))).collect()),
    }
}

#[test]
fn report_matches_golden_schema() {
    let o = spinq(&["run", "nil_cy", "--points", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let golden: Value =
        serde_json::from_str(include_str!("golden/report_schema.json")).expect("golden schema parses");
    assert_eq!(skeleton(&stdout_json(&o)), golden);
}

#[test]
fn list_includes_every_catalog_entry() {
    let o = spinq(&["list", "--json"]);
    assert_eq!(code(&o), 0);
    let ids: Vec<String> = stdout_json(&o)
        .as_array()
        .expect("array")
        .iter()
        .map(|e| e["id"].as_str().expect("id").to_string())
        .collect();
    for id in ["bs_asd_bundle", "nil_cy", "round_s7_ambient", "flat_T7"] {
        assert!(ids.iter().any(|i| i == id), "missing {id}");
    }
}

#[test]
fn passing_run_exits_zero_and_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = spinq(&["run", "flat_T8", "--suite", "hodge-transfer", "--report", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["pass"], json!(true));
    assert_eq!(report["suites"][0]["suite"], json!("hodge-transfer"));
}

#[test]
fn failing_check_exits_one() {
    // The dΩ⁻ coefficient as printed does not hold on the link.
    let o = spinq(&["run", "gh_link", "--suite", "su3-link"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL link.domega_minus"));
    assert_eq!(stdout_json(&o)["pass"], json!(false));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&spinq(&["run", "nil_cy", "--suite", "no-such-suite"])), 2);
    assert_eq!(code(&spinq(&["run", "flat_T7", "--suite", "gibbons-hawking"])), 2);
    assert_eq!(code(&spinq(&["run", "/nonexistent/algebra.json"])), 2);
    assert_eq!(code(&spinq(&["run", "nil_cy", "--mode", "symbolic"])), 2);
    assert_eq!(code(&spinq(&["eval", "(+ x", "flat_T7"])), 2);
}

#[test]
fn malformed_document_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"dim": 3, "coframe": ["a", "b"]}"#).unwrap();
    let o = spinq(&["run", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("$."));
}

#[test]
fn export_then_import_preserves_structure() {
    let dir = tempfile::tempdir().unwrap();
    for id in ["flat_T7", "nil_cy", "round_s7_ambient", "balanced_b5t2_a"] {
        let path = dir.path().join(format!("{id}.json"));
        assert_eq!(code(&spinq(&["export", id, path.to_str().unwrap()])), 0);
        let doc = spinq::frame::json::import(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let entry = spinq::catalog::load(id).unwrap();
        assert!(spinq::frame::json::same_structure(&doc.algebra, &entry.alg), "{id}");
        assert_eq!(doc.forms.len(), entry.forms.len(), "{id}");
        for (name, f) in &entry.forms {
            let g = &doc.forms[name];
            assert_eq!((g.deg(), g.terms()), (f.deg(), f.terms()), "{id}.{name}");
        }
    }
}

#[test]
fn exported_g2_frame_runs_as_a_user_document() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t7.json");
    assert_eq!(code(&spinq(&["export", "flat_T7", path.to_str().unwrap()])), 0);
    let o = spinq(&["run", path.to_str().unwrap(), "--points", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["target"], json!("t7"));
}

#[test]
fn eval_quantity_and_expression() {
    let o = spinq(&["eval", "scal", "gh_link"]);
    assert_eq!(code(&o), 0);
    assert!((stdout_json(&o).as_f64().unwrap() - 27.0).abs() < 1e-12);
    let o = spinq(&["eval", "(+ (* 2 r) 1)", "nil_cy", "--at", "r=1.25"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!((stdout_json(&o).as_f64().unwrap() - 3.5).abs() < 1e-12);
}

#[test]
fn reports_are_reproducible_apart_from_wall_time() {
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("wall_time_ms");
        for s in v["suites"].as_array_mut().unwrap() {
            s.as_object_mut().unwrap().remove("wall_time_ms");
        }
        v
    };
    let a = stdout_json(&spinq(&["run", "nil_cy", "--points", "5", "--seed", "7"]));
    let b = stdout_json(&spinq(&["run", "nil_cy", "--points", "5", "--seed", "7"]));
    assert_eq!(strip(a), strip(b));
}

#[test]
fn golden_schema_file_is_present() {
    assert!(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/report_schema.json").exists());
}
