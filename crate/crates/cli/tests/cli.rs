use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn macsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_macsim"))
        .args(args)
        .current_dir(dir)
        .env_remove("MACSIM_MAX_GAMMA")
        .output()
        .expect("binary runs")
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

const COUNT_HOP: &str = r#"{
  "config": {
    "algorithm": "count-hop", "n": 4, "cap": 2, "rho": "1/2", "beta": "1", "horizon": 2000,
    "adversary": { "kind": "saturating", "pattern": { "kind": "round-robin" } }
  },
  "output": { "csv": "trace.csv", "json": "summary.json" },
  "sweep": ["1/4", "1/2", "3/4"]
}"#;

#[test]
fn run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.json"), COUNT_HOP).unwrap();
    let out = macsim(dir.path(), &["run", "s.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("round,total_queued,on_count,feedback,delivered_id,control_bits"));
    assert_eq!(csv.lines().count(), 2001);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["rho"], "1/2");
    let checks = summary["checks"].as_array().unwrap();
    let latency = checks.iter().find(|c| c["name"] == "latency").unwrap();
    assert_eq!(latency["bound"], "68");
    assert_eq!(latency["verdict"], "pass");
    assert_eq!(summary["audit"]["result"], "pass");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.json"), COUNT_HOP).unwrap();
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    assert_eq!(macsim(dir.path(), &["run", "s.json"]).status.code(), Some(0));
    let (csv, json) = (read("trace.csv"), read("summary.json"));
    assert_eq!(macsim(dir.path(), &["run", "s.json"]).status.code(), Some(0));
    assert_eq!(csv, read("trace.csv"));
    assert_eq!(json, read("summary.json"));
}

#[test]
fn shipped_scenarios_run() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["count_hop_n4.json", "orchestra_n4.json", "k_cycle_n7.json", "k_cycle_witness.json"] {
        let path = scenarios().join(name);
        let out = macsim(dir.path(), &["run", path.to_str().unwrap(), "--json", "x.json", "--csv", "x.csv"]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn bad_scenarios_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        COUNT_HOP.replace("\"sweep\"", "\"colour\": 1, \"sweep\""),
        COUNT_HOP.replace("\"1/2\"", "\"0.5\""),
        COUNT_HOP.replace("\"cap\": 2", "\"cap\": 4"),
        COUNT_HOP.replace("count-hop", "orchestra"),
        "not json".to_string(),
    ];
    for (i, text) in cases.iter().enumerate() {
        std::fs::write(dir.path().join("s.json"), text).unwrap();
        let out = macsim(dir.path(), &["run", "s.json"]);
        assert_eq!(out.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(macsim(dir.path(), &["run", "missing.json"]).status.code(), Some(2));
    assert_eq!(macsim(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"config": {"algorithm": "orchestra", "n": 6, "cap": 3, "rho": "1", "beta": "1", "horizon": 100,
        "adversary": {"kind": "saturating", "pattern": {"kind": "round-robin"}}, "strict_control_bits": 1}}"#;
    std::fs::write(dir.path().join("s.json"), text).unwrap();
    let out = macsim(dir.path(), &["run", "s.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("control-bits: observed 6 vs bound 3 -> Fail"));
}

#[test]
fn sweep_prints_one_line_per_rate() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.json"), COUNT_HOP).unwrap();
    let out = macsim(dir.path(), &["sweep", "s.json"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let rates: Vec<_> = stdout.lines().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(rates, ["1/4", "1/2", "3/4"]);
    for i in 0..3 {
        assert!(dir.path().join(format!("trace.{i}.csv")).exists());
        assert!(dir.path().join(format!("summary.{i}.json")).exists());
    }
    let out = macsim(dir.path(), &["sweep", "s.json", "--rho", "1/8,1/3"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);
}

#[test]
fn layouts_match_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = macsim(dir.path(), &["layout", "kcycle", "--n", "7", "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden("layout_kcycle_7_3.json"));
    let out = macsim(dir.path(), &["layout", "k-clique", "--n", "8", "--k", "4"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden("layout_kclique_8_4.json"));
    assert_eq!(macsim(dir.path(), &["layout", "kcycle", "--n", "7", "--k", "7"]).status.code(), Some(2));
}

#[test]
fn gamma_limit_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["layout", "ksubsets", "--n", "16", "--k", "8"];
    assert_eq!(macsim(dir.path(), &args).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_macsim"))
        .args(args)
        .env("MACSIM_MAX_GAMMA", "20000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn witness_emits_admissible_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = macsim(
        dir.path(),
        &["witness", "kcycle", "--n", "7", "--k", "3", "--rho", "1/2", "--t", "700", "--out", "w.csv"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("station "));
    let out = macsim(dir.path(), &["validate-trace", "w.csv", "--rho", "1/2", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("351 packets over 700 rounds"));
    let low = macsim(dir.path(), &["witness", "kcycle", "--n", "7", "--k", "3", "--rho", "1/4", "--t", "700"]);
    assert_eq!(low.status.code(), Some(2));
    let pair = macsim(
        dir.path(),
        &["witness", "ksubsets", "--n", "5", "--k", "2", "--rho", "1/5", "--t", "100", "--kind", "pair"],
    );
    assert_eq!(pair.status.code(), Some(0));
    assert!(String::from_utf8(pair.stdout).unwrap().starts_with("round,station,destination\n"));
}

#[test]
fn validate_trace_reports_violation() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "round,station,destination\n1,0,1\n1,0,1\n1,2,1\n2,0,1\n").unwrap();
    let out = macsim(dir.path(), &["validate-trace", "bad.csv", "--rho", "1/2", "--beta", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "violation: 3 packets in rounds [1, 1], at most 5/2 allowed\n"
    );
    std::fs::write(dir.path().join("junk.csv"), "round,station,destination\n1,x,1\n").unwrap();
    let out = macsim(dir.path(), &["validate-trace", "junk.csv", "--rho", "1/2", "--beta", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = macsim(dir.path(), &["validate-trace", "bad.csv", "--rho", "0.5", "--beta", "2"]);
    assert_eq!(out.status.code(), Some(2));
}
