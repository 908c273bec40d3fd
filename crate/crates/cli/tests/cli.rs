use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrec"))
        .args(args)
        .env_remove("QR_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_is_deterministic_and_records_expected_count() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = qrec(&["simulate", "--window-t", "10", "--window-x", "10", "--out", path(d)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(a.join("points.csv")).unwrap(), fs::read(b.join("points.csv")).unwrap());
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["expected_count"], 100.0);
    assert_eq!(manifest["seed"], 42);
    assert!(manifest["algorithm_version"].is_string());
    assert!(!a.join("ground.csv").exists());
}

#[test]
fn simulate_ground_process_and_seed_sources() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    let o = Command::new(env!("CARGO_BIN_EXE_qrec"))
        .args(["simulate", "--t-lo", "1", "--t-hi", "100", "--format", "jsonl", "--out", path(&out)])
        .env("QR_SEED", "1234")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(out.join("ground.jsonl").exists());
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 1234);
    let first = fs::read_to_string(out.join("points.jsonl")).unwrap();
    assert!(first.starts_with("{\"t\":"));

    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 9\nwindow_t = 3.0\nwindow_x = 4.0\n").unwrap();
    let out2 = dir.path().join("c");
    let o = qrec(&["simulate", "--config", path(&cfg), "--window-x", "5", "--out", path(&out2)]);
    assert_eq!(code(&o), 0);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out2.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["expected_count"], 15.0);
}

#[test]
fn invalid_config_exits_2_without_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad");
    let o = qrec(&["simulate", "--k", "0", "--t-lo", "1", "--t-hi", "2", "--out", path(&out)]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "colour = 1\n").unwrap();
    assert_eq!(code(&qrec(&["simulate", "--config", path(&cfg), "--out", path(&out)])), 2);
    assert_eq!(code(&qrec(&["simulate", "--bogus"])), 2);
}

#[test]
fn extract_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("points.csv");
    fs::write(&input, "t,x\n1,3\n2,1\n3,2\n").unwrap();
    let out = dir.path().join("x");
    let o = qrec(&["extract", path(&input), "--k", "2", "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let corners = fs::read_to_string(out.join("corners.csv")).unwrap();
    assert_eq!(corners, "t,x,clause,is_record\n2,3,II,false\n3,2,I,true\n");
    assert_eq!(fs::read_to_string(out.join("records.csv")).unwrap(), "t,x\n3,2\n");
    assert_eq!(fs::read_to_string(out.join("path.csv")).unwrap(), "jump_time,value\n2,3\n3,2\n");
    assert_eq!(fs::read_to_string(out.join("lifetimes.csv")).unwrap(), "s,x\n1,3\n");
}

#[test]
fn extract_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "t,x\n").unwrap();
    let out = dir.path().join("e");
    assert_eq!(code(&qrec(&["extract", path(&empty), "--out", path(&out)])), 0);
    assert_eq!(fs::read_to_string(out.join("corners.csv")).unwrap(), "t,x,clause,is_record\n");

    let small = dir.path().join("small.csv");
    fs::write(&small, "t,x\n1,3\n2,1\n").unwrap();
    let out = dir.path().join("s");
    assert_eq!(code(&qrec(&["extract", path(&small), "--k", "5", "--out", path(&out)])), 0);
    assert_eq!(fs::read_to_string(out.join("corners.csv")).unwrap(), "t,x,clause,is_record\n");

    let tie = dir.path().join("tie.csv");
    fs::write(&tie, "t,x\n1,3\n2,1\n3,1\n").unwrap();
    let o = qrec(&["extract", path(&tie), "--out", path(&dir.path().join("t"))]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 3"), "{}", String::from_utf8_lossy(&o.stderr));

    let junk = dir.path().join("junk.csv");
    fs::write(&junk, "t,x\n1,a\n").unwrap();
    assert_eq!(code(&qrec(&["extract", path(&junk), "--out", path(&dir.path().join("j"))])), 2);
    assert_eq!(code(&qrec(&["extract", path(&small), "--k", "1.5"])), 2);
}

#[test]
fn verify_exit_codes_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let o = qrec(&["verify", "--scenario", "V8", "--emit-raw", "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("V8.json")).unwrap()).unwrap();
    assert_eq!(report["scenario_id"], "V8");
    assert_eq!(report["passed"], true);
    assert!(out.join("V8_planar_kth_min.csv").exists());
    assert_eq!(code(&qrec(&["report", "--out", path(&out)])), 0);

    let o = qrec(&["verify", "--scenario", "V3", "--thin-p", "0.1", "--k", "2", "--replicas", "300", "--out", path(&out)]);
    assert_eq!(code(&o), 1);
    assert_eq!(code(&qrec(&["report", "--out", path(&out)])), 1);

    assert_eq!(code(&qrec(&["verify", "--scenario", "V11", "--out", path(&out)])), 2);
    assert_eq!(code(&qrec(&["verify", "--replicas", "0", "--out", path(&out)])), 2);
    assert_eq!(code(&qrec(&["report", "--out", path(&dir.path().join("none"))])), 2);
}
