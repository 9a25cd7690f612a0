use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use iwal_core::analysis::consistency_bound;
use iwal_core::{WeightedExample, WeightedSample};
use serde_json::Value;

const CONFIG: &str = r#"
rounds = 300
checkpoints = [50, 100, 300]
seeds = [4, 5, 6]
output_dir = "OUT"

[stream]
marginal = { kind = "uniform_unit" }
labeler = { kind = "flip", eta = 0.1, base = { form = "threshold", threshold = 0.5 } }

[class]
kind = "threshold_grid"
count = 21
lo = 0.0
hi = 1.0

[threshold]
c0 = 4.0
delta = 0.1
mode = "experimental"
c1 = 1.0
c2 = 1.0
"#;

fn iwal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iwal")).args(args).output().unwrap()
}

fn setup(text: &str) -> (tempfile::TempDir, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = dir.path().join("exp.toml");
    fs::write(&config, text.replace("OUT", out.to_str().unwrap())).unwrap();
    (dir, config, out)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn last_queries(trace: &Path) -> u64 {
    let text = fs::read_to_string(trace).unwrap();
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    last["queries_so_far"].as_u64().unwrap()
}

#[test]
fn single_round_queries_once_per_seed() {
    let (_d, config, out) = setup(CONFIG);
    let o = iwal(&["run", "-c", config.to_str().unwrap(), "--rounds", "1", "--checkpoints", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_json(&out.join("summary.json"));
    let runs = summary["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    assert!(runs.iter().all(|r| r["queries"] == 1));
    let trace = fs::read_to_string(out.join("trace_seed4.jsonl")).unwrap();
    assert_eq!(trace.lines().count(), 1);
    let round: Value = serde_json::from_str(trace.trim()).unwrap();
    assert_eq!(round["P"], 1.0);
    assert_eq!(round["Q"], true);
}

#[test]
fn reruns_are_byte_identical() {
    let (_d, config, out) = setup(CONFIG);
    let other = out.with_file_name("again");
    let a = iwal(&["run", "-c", config.to_str().unwrap()]);
    let b = iwal(&["run", "-c", config.to_str().unwrap(), "--output-dir", other.to_str().unwrap()]);
    assert!(a.status.success() && b.status.success());
    let mut names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for name in names {
        assert_eq!(fs::read(out.join(&name)).unwrap(), fs::read(other.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn traces_samples_and_summary_agree() {
    let (_d, config, out) = setup(CONFIG);
    assert!(iwal(&["run", "-c", config.to_str().unwrap()]).status.success());
    let summary = read_json(&out.join("summary.json"));
    for run in summary["runs"].as_array().unwrap() {
        let seed = run["seed"].as_u64().unwrap();
        let queries = last_queries(&out.join(format!("trace_seed{seed}.jsonl")));
        assert_eq!(run["queries"].as_u64().unwrap(), queries);
        let text = fs::read_to_string(out.join(format!("sample_seed{seed}.csv"))).unwrap();
        assert!(text.starts_with("round,x0,y,weight\n"));
        let sample = WeightedSample::read_csv(text.as_bytes(), 300).unwrap();
        assert_eq!(sample.examples().len() as u64, queries);
        assert!(sample.examples().iter().all(|e: &WeightedExample| e.weight >= 1.0));
    }
}

#[test]
fn bounds_table_matches_runs_and_formulas() {
    let (_d, config, out) = setup(CONFIG);
    let o = iwal(&["bounds", "-c", config.to_str().unwrap(), "--checkpoints", "300", "--rounds", "300"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("bounds.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    for col in ["n", "measured_queries", "consistency_bound", "label_complexity_strict", "label_complexity_fitted"] {
        assert!(header.contains(&col), "{col}");
    }
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("n"), 300.0);
    assert_eq!(col("consistency_bound"), consistency_bound(4.0, 300));

    assert!(iwal(&["run", "-c", config.to_str().unwrap(), "--checkpoints", "300"]).status.success());
    let mut counts: Vec<u64> =
        [4, 5, 6].iter().map(|s| last_queries(&out.join(format!("trace_seed{s}.jsonl")))).collect();
    counts.sort_unstable();
    assert_eq!(col("measured_queries"), counts[1] as f64);
}

#[test]
fn validate_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("theta.json");
    let o = iwal(&["validate", "theta", "--report", report.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("PASS theta/"));
    assert_eq!(read_json(&report)[0]["suite"], "theta");

    let o = iwal(&["validate", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown suite"));
}

#[test]
fn invalid_configs_exit_with_two() {
    let (_d, config, _) = setup(&format!("surprise = true\n{CONFIG}"));
    assert_eq!(iwal(&["run", "-c", config.to_str().unwrap()]).status.code(), Some(2));

    let (_d, config, _) = setup(CONFIG);
    let c = config.to_str().unwrap();
    assert_eq!(iwal(&["run", "-c", c, "--checkpoints", "400"]).status.code(), Some(2));
    assert_eq!(iwal(&["run", "-c", c, "--c0", "1.5"]).status.code(), Some(2));
    assert_eq!(iwal(&["run", "-c", "/nonexistent/exp.toml"]).status.code(), Some(2));

    // analysis mode with a C0 below the deviation budget
    let (_d, config, _) = setup(&CONFIG.replace("mode = \"experimental\"\nc1 = 1.0\nc2 = 1.0\n", ""));
    let o = iwal(&["run", "-c", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not dominate"));
}
