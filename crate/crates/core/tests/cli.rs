use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn run(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_lingtransfer")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ingest_graphs_align_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let instances = d.join("generic.jsonl");
    run(&["ingest", "--dataset", "generic", "--in", s(&fixtures().join("generic/corpus")), "--out", s(&instances)]);
    assert_eq!(fs::read_to_string(&instances).unwrap().lines().count(), 12);
    assert!(d.join("generic.jsonl.splits.json").exists());

    let amr = d.join("amr.json");
    run(&["graphs", "--formalism", "amr", "--instances", s(&instances), "--parses", s(&fixtures().join("generic/parses")), "--out", s(&amr)]);
    let dep = d.join("dep.json");
    run(&["graphs", "--formalism", "dep", "--instances", s(&instances), "--parses", s(&fixtures().join("generic/parses")), "--out", s(&dep)]);

    let aligned = d.join("aligned.json");
    let report = d.join("report.json");
    run(&["align", "--graphs", s(&amr), "--out", s(&aligned), "--report", s(&report)]);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let frac = |k: &str| r[k]["aligned"].as_f64().unwrap() / r[k]["total_alignable"].as_f64().unwrap();
    assert!(frac("after") >= frac("before"));
}

#[test]
fn ingest_brat_and_efgc_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    for (name, extra) in [("risec", vec![]), ("efgc", vec![]), ("mscorpus", vec!["--merge-map"])] {
        let out = dir.path().join(format!("{name}.jsonl"));
        let input = fixtures().join(name);
        let map = input.join("merge_map.json");
        let mut args = vec!["ingest", "--dataset", name, "--in", s(&input), "--out", s(&out)];
        if !extra.is_empty() {
            args.extend([extra[0], s(&map)]);
        }
        run(&args);
        assert!(fs::read_to_string(&out).unwrap().lines().count() > 0, "{name}");
    }
}

#[test]
fn bad_input_fails_cleanly() {
    let out = Command::new(env!("CARGO_BIN_EXE_lingtransfer"))
        .args(["ingest", "--dataset", "risec", "--in", "/nonexistent", "--out", "/tmp/x.jsonl"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"));
}
