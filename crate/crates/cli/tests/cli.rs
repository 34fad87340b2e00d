use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sparsepairrank"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let corpus = root.join("c");
        ok(&["synth", "--topics", "6", "--k", "15", "--seed", "2", "--out", corpus.to_str().unwrap()]);
        Fixture { _dir: dir, root }
    }

    fn path(&self, rel: &str) -> String {
        self.root.join(rel).to_string_lossy().into_owned()
    }
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn synth_writes_a_complete_corpus() {
    let f = Fixture::new();
    let prefs = read(f.path("c/prefs.csv"));
    assert!(prefs.starts_with("query_id,doc_i,doc_j,probability"));
    assert_eq!(prefs.lines().count(), 1 + 6 * 15 * 14);
    assert_eq!(read(f.path("c/pointwise.run")).lines().count(), 6 * 15);
    let spec: serde_json::Value = serde_json::from_str(&read(f.path("c/synth.json"))).unwrap();
    assert_eq!(spec["seed"], 2);
}

#[test]
fn rerank_writes_trec_and_json() {
    let f = Fixture::new();
    let (p, r) = (f.path("c/prefs.csv"), f.path("c/pointwise.run"));
    let out = ok(&["rerank", "--prefs", &p, "--pointwise", &r, "--sampler", "s-window", "--rate", "0.3", "--tag", "sw"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6 * 15);
    let first: Vec<&str> = text.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(first.len(), 6);
    assert_eq!((first[1], first[3], first[5]), ("Q0", "1", "sw"));

    let json = ok(&["rerank", "--prefs", &p, "--pointwise", &r, "--aggregator", "pagerank", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert!(v.is_array() || v.is_object());
}

#[test]
fn sweep_then_significance() {
    let f = Fixture::new();
    let (p, r, q) = (f.path("c/prefs.csv"), f.path("c/pointwise.run"), f.path("c/qrels.txt"));
    let sweep = f.path("s.jsonl");
    ok(&[
        "sweep", "--prefs", &p, "--pointwise", &r, "--qrels", &q, "--rates", "0.2,0.6",
        "--repetitions", "2", "--aggregators", "greedy,additive", "--out", &sweep,
    ]);
    let lines = read(&sweep).lines().count();
    // per aggregator: baseline, 2 rates × 2 g-random repetitions, 2 n-window, 2 s-window
    assert_eq!(lines, 2 * (1 + 4 + 2 + 2));
    let out = ok(&["significance", "--sweep", &sweep, "--test-count", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("greedy") && text.contains("s-window"), "{text}");
    let json = ok(&["significance", "--sweep", &sweep, "--format", "json"]);
    let rows: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 6);
}

#[test]
fn diagnose_and_grid_report_json() {
    let f = Fixture::new();
    let (p, r, q) = (f.path("c/prefs.csv"), f.path("c/pointwise.run"), f.path("c/qrels.txt"));
    let d = ok(&["diagnose", "--prefs", &p, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&d.stdout).unwrap();
    assert_eq!(v["per_query"].as_array().unwrap().len(), 6);
    assert_eq!(v["histogram"].as_array().unwrap().len(), 20);

    let g = ok(&[
        "grid-lambda", "--prefs", &p, "--pointwise", &r, "--qrels", &q, "--rates", "0.3",
        "--lambdas", "2..5", "--folds", "3", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&g.stdout).unwrap();
    let lambda = v[0]["lambda"].as_u64().unwrap();
    assert!((2..=5).contains(&lambda));
}

#[test]
fn config_file_supplies_flags_and_the_command_line_wins() {
    let f = Fixture::new();
    let (p, r) = (f.path("c/prefs.csv"), f.path("c/pointwise.run"));
    let cfg = f.path("cfg.toml");
    std::fs::write(
        &cfg,
        format!("prefs = \"{p}\"\npointwise = \"{r}\"\n[rerank]\ntag = \"fromfile\"\naggregator = \"additive\"\n"),
    )
    .unwrap();
    let out = ok(&["--config", &cfg, "rerank"]);
    assert!(String::from_utf8(out.stdout).unwrap().lines().all(|l| l.ends_with("fromfile")));
    let out = ok(&["--config", &cfg, "rerank", "--tag", "cli"]);
    assert!(String::from_utf8(out.stdout).unwrap().lines().all(|l| l.ends_with("cli")));
}

#[test]
fn bad_configs_fail_cleanly() {
    let f = Fixture::new();
    let cfg = f.path("bad.toml");
    std::fs::write(&cfg, "no_such_flag = 3\n").unwrap();
    let out = run(&["--config", &cfg, "diagnose", "--prefs", &f.path("c/prefs.csv")]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_flag"));
    let out = run(&["--config", &f.path("missing.toml"), "depth"]);
    assert!(!out.status.success());
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let out = run(&["diagnose", "--prefs", "/nonexistent/prefs.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = run(&["rerank", "--prefs", "x"]);
    assert_eq!(out.status.code(), Some(2), "usage errors come from the parser");

    let f = Fixture::new();
    let (p, r) = (f.path("c/prefs.csv"), f.path("c/pointwise.run"));
    let out = run(&["rerank", "--prefs", &p, "--pointwise", &r, "--sampler", "n-window", "--m", "40"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["sweep", "--prefs", &p, "--pointwise", &r, "--qrels", &f.path("c/qrels.txt"), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn depth_reports_budget_depths() {
    let out = ok(&["depth", "--budget", "2450", "--rates", "0.1,0.3,1.0", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let depths: Vec<u64> = v["depths"].as_array().unwrap().iter().map(|r| r["k"].as_u64().unwrap()).collect();
    assert_eq!(depths, [157, 90, 50]);
}
