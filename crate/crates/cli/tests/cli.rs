use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;

fn dlin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlin")).args(args).env_remove("DLIN_CACHE_DIR").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--output", "json"]);
    let out = dlin(&all);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn value(v: &Value) -> (String, String) {
    (v["value"]["num"].as_str().unwrap().to_string(), v["value"]["den"].as_str().unwrap().to_string())
}

#[test]
fn classic_bound() {
    let v = json(&["bound", "-r", "1", "-n", "13", "-d", "6"]);
    assert_eq!(value(&v), ("40".into(), "1".into()));
    assert_eq!(v["variant"], "Delsarte");
    assert_eq!(v["bound"]["floor"], "40");
    assert_eq!(v["value"]["decimal"], "40.00");
}

#[test]
fn r2_n17_d6_is_256() {
    let v = json(&["bound", "-r", "2", "-n", "17", "-d", "6"]);
    assert_eq!(value(&v), ("256".into(), "1".into()));
    assert_eq!(v["bound"]["floor_log2"], 8);
}

#[test]
fn r2_n16_d4_is_2048() {
    let v = json(&["bound", "-r", "2", "-n", "16", "-d", "4"]);
    assert_eq!(value(&v), ("2048".into(), "1".into()));
}

#[test]
fn text_report_has_every_field() {
    let out = dlin(&["bound", "-r", "2", "-n", "13", "-d", "6"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for key in ["variant", "status", "value", "log2", "floor", "model", "pivots", "time"] {
        assert!(text.lines().any(|l| l.starts_with(key)), "missing {key} in\n{text}");
    }
    assert!(text.contains("17152/707 (24.26)"), "{text}");
}

#[test]
fn product_objective_reports_the_root() {
    let v = json(&["bound", "-r", "2", "-n", "13", "-d", "6", "--constraints", "c2-weak", "--objective", "obj-product"]);
    assert_eq!(v["value_root"], 2);
    assert_eq!(v["bound"]["is_root"], true);
    let x: f64 = v["bound"]["decimal"].as_str().unwrap().parse().unwrap();
    let raw = v["value_f64"].as_f64().unwrap();
    assert!((x - raw.sqrt()).abs() < 0.01);
}

#[test]
fn json_schema_is_stable() {
    let args = ["bound", "-r", "2", "-n", "10", "-d", "4"];
    let (a, b) = (json(&args), json(&args));
    let keys = |v: &Value| v.as_object().unwrap().keys().cloned().collect::<Vec<_>>();
    assert_eq!(keys(&a), keys(&b));
    assert_eq!(a["schema_version"], 1);
    assert_eq!(a["value"], b["value"]);
    for k in ["num", "den", "decimal"] {
        assert!(a["value"][k].is_string());
    }
}

#[test]
fn float_solver_is_flagged() {
    let v = json(&["bound", "-r", "2", "-n", "13", "-d", "6", "--solver", "float"]);
    assert!(v["value"].is_null());
    assert!((v["value_f64"].as_f64().unwrap() - 17152.0 / 707.0).abs() < 1e-6);
}

#[test]
fn exit_classes() {
    assert_eq!(code(&dlin(&["verify", "--suite", "nope"])), 2);
    assert_eq!(code(&dlin(&["bound", "-n", "3"])), 2);
    assert_eq!(code(&dlin(&["bound", "-n", "3", "-d", "9"])), 3);
    assert_eq!(code(&dlin(&["bound", "-r", "2", "-n", "5", "-d", "3", "--even-reduction"])), 3);
    assert_eq!(code(&dlin(&["bound", "-r", "3", "-n", "30", "-d", "6"])), 4);
    assert_eq!(code(&dlin(&["bound", "-r", "5", "-n", "8", "-d", "2"])), 4);
    assert_eq!(code(&dlin(&["bound", "-r", "2", "-n", "13", "-d", "6", "--cold", "--max-pivots", "1"])), 5);
    assert_eq!(code(&dlin(&["bound", "-n", "13", "-d", "6", "--solver", "export"])), 3);
}

#[test]
fn config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("dlin.conf");
    std::fs::write(&cfg, "max_pivots = 1\n").unwrap();
    let c = cfg.to_str().unwrap();
    assert_eq!(code(&dlin(&["--config", c, "bound", "-r", "2", "-n", "13", "-d", "6", "--cold"])), 5);
    // Flags override the file.
    assert_eq!(code(&dlin(&["--config", c, "bound", "-r", "2", "-n", "13", "-d", "6", "--cold", "--max-pivots", "100000"])), 0);
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(code(&dlin(&["--config", c, "bound", "-n", "13", "-d", "6"])), 3);
}

#[test]
fn cache_directory_is_populated() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("tables");
    let out = Command::new(env!("CARGO_BIN_EXE_dlin"))
        .args(["bound", "-r", "2", "-n", "9", "-d", "4"])
        .env("DLIN_CACHE_DIR", &cache)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(std::fs::read_dir(&cache).unwrap().count() > 0);
    let again = Command::new(env!("CARGO_BIN_EXE_dlin"))
        .args(["bound", "-r", "2", "-n", "9", "-d", "4"])
        .env("DLIN_CACHE_DIR", &cache)
        .output()
        .unwrap();
    assert_eq!(out.stdout.split(|b| *b == b'\n').find(|l| l.starts_with(b"value")), again.stdout.split(|b| *b == b'\n').find(|l| l.starts_with(b"value")));
}

#[test]
fn verify_suites() {
    let out = dlin(&["verify", "--suite", "krawtchouk"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).starts_with("PASS krawtchouk"));

    let started = Instant::now();
    let v = json(&["verify", "--suite", "all", "--max-n", "3"]);
    assert!(started.elapsed() < Duration::from_secs(120));
    assert_eq!(v["passed"], true);
    assert_eq!(v["suites"].as_array().unwrap().len(), 5);
    let first = &v["suites"][0]["checks"][0];
    for k in ["check", "params", "status", "lhs", "rhs"] {
        assert!(first.get(k).is_some(), "{first}");
    }
}

#[test]
fn export_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["lp", "mps"] {
        let a = dir.path().join(format!("a.{format}"));
        let b = dir.path().join(format!("b.{format}"));
        for p in [&a, &b] {
            let out = dlin(&["export", "-r", "2", "-n", "12", "-d", "4", "--format", format, "--out", p.to_str().unwrap()]);
            assert_eq!(code(&out), 0);
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}

fn highs_optimum(path: &Path) -> Option<f64> {
    let probe = Command::new("python3").args(["-c", "import highspy"]).output();
    if !probe.is_ok_and(|o| o.status.success()) {
        eprintln!("highspy not installed; skipping external solve");
        return None;
    }
    let script = format!(
        "import highspy\nh = highspy.Highs()\nh.setOptionValue('output_flag', False)\n\
         assert h.readModel({:?}) == highspy.HighsStatus.kOk\nh.run()\n\
         assert h.getModelStatus() == highspy.HighsModelStatus.kOptimal\n\
         print(h.getInfo().objective_function_value)\n",
        path.to_str().unwrap()
    );
    let out = Command::new("python3").args(["-c", &script]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    Some(String::from_utf8(out.stdout).unwrap().trim().parse().unwrap())
}

#[test]
fn exported_r2_n20_d8_solves_to_256() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.lp");
    let out = dlin(&["bound", "-r", "2", "-n", "20", "-d", "8", "--solver", "export", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("exported"));
    if let Some(v) = highs_optimum(&path) {
        assert!((v - 256.0).abs() < 1e-6, "{v}");
    }
}

#[test]
fn orbits_listing() {
    let v = json(&["orbits", "-r", "2", "-n", "4", "--list"]);
    assert_eq!(v["compositions"], 35);
    let sizes: u64 = v["list"].as_array().unwrap().iter().map(|o| o["size"].as_u64().unwrap()).sum();
    assert_eq!(sizes, 35);
    assert_eq!(v["orbits"], v["list"].as_array().unwrap().len());
}

#[test]
fn table_with_stars() {
    let dir = tempfile::tempdir().unwrap();
    let best = dir.path().join("best.csv");
    std::fs::write(&best, "n,d,k\n13,6,5\n13,4,9\n").unwrap();
    let csv = dir.path().join("t.csv");
    let out = dlin(&[
        "table", "-r", "2", "--n", "13", "--d", "4-6:2", "--variants", "c2-obj,delsarte", "--jobs", "2",
        "--best-known", best.to_str().unwrap(), "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,d,C2/Obj,Delsarte");
    assert_eq!(lines.len(), 3);
    // floor(log2 24.26) = 4 and floor(log2 40) = 5 against k = 5.
    assert_eq!(lines[2], "13,6,24.26,40.00*");
}

#[test]
fn table_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    let out = dlin(&["table", "--n", "10-9", "--d", "4", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), "n,d,C2'/Obj',C2'/Obj,C2/Obj',C2/Obj,Delsarte\n");
    assert!(String::from_utf8_lossy(&out.stderr).contains("no cells are marked"));

    let missing = dir.path().join("absent.csv");
    let out = dlin(&["table", "--n", "8", "--d", "3", "--variants", "delsarte", "--best-known", missing.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(!stdout(&out).contains('*'));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not found"));

    assert_eq!(code(&dlin(&["table", "--n", "8", "--d", "3", "--even-reduction"])), 3);
}
