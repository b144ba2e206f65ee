use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pursuit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pursuit"))
        .args(args)
        .current_dir(dir)
        .env_remove("PURSUIT_CONFIG")
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn run_writes_csv_and_a_verifiable_log() {
    let dir = tempfile::tempdir().unwrap();
    ok(&pursuit(dir.path(), &["run", "--seed", "4", "--out", "r"]));
    let episodes = csv_rows(&dir.path().join("r/episodes.csv"));
    assert_eq!(episodes.len(), 1);
    assert_eq!(&episodes[0][0], "4");
    let steps: usize = episodes[0][4].parse().unwrap();
    assert_eq!(csv_rows(&dir.path().join("r/coverage.csv")).len(), steps + 1);

    let out = ok(&pursuit(dir.path(), &["replay", "r/episode-4.jsonl", "--out", "p", "--verify"]));
    assert!(out.starts_with("verified"));
    // three pursuers, one row per pursuer per step
    assert_eq!(csv_rows(&dir.path().join("p/agents.csv")).len(), 3 * steps);
    assert_eq!(csv_rows(&dir.path().join("p/world.csv")).len(), steps);
}

#[test]
fn replaying_a_log_as_a_script_reproduces_it() {
    let dir = tempfile::tempdir().unwrap();
    ok(&pursuit(dir.path(), &["run", "--map", "rand15", "--seed", "2", "--out", "a"]));
    ok(&pursuit(
        dir.path(),
        &["run", "--map", "rand15", "--seed", "2", "--policy", "scripted", "--actions", "a/episode-2.jsonl", "--out", "b"],
    ));
    let a = fs::read(dir.path().join("a/episode-2.jsonl")).unwrap();
    let b = fs::read(dir.path().join("b/episode-2.jsonl")).unwrap();
    assert!(a == b, "scripted replay diverged");
}

#[test]
fn tampered_log_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    ok(&pursuit(dir.path(), &["run", "--seed", "1", "--out", "r"]));
    let path = dir.path().join("r/episode-1.jsonl");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines.pop();
    fs::write(&path, lines.join("\n")).unwrap();
    let out = pursuit(dir.path(), &["replay", "r/episode-1.jsonl", "--out", "p", "--verify"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn csv_script_drives_the_episode() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.csv"), "step,agent,dtheta,dv\n0,0,0.1,0.3\n1,0,0.0,0.3\n").unwrap();
    ok(&pursuit(dir.path(), &["run", "--policy", "scripted", "--actions", "a.csv", "--out", "s"]));
    ok(&pursuit(dir.path(), &["replay", "s/episode-0.jsonl", "--out", "p"]));
    let agents = csv_rows(&dir.path().join("p/agents.csv"));
    let first: Vec<&str> = agents[0].iter().collect();
    assert_eq!((first[9], first[10]), ("0.1", "0.3"));
    let second = agents.iter().find(|r| &r[0] == "0" && &r[1] == "1").unwrap();
    assert_eq!((&second[9], &second[10]), ("0", "0"));
}

#[test]
fn batch_report_matches_episode_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&pursuit(
        dir.path(),
        &["batch", "--map", "rand15", "--episodes", "3", "--seed", "10", "--parallelism", "2", "--alloc", "greedy", "--out", "b"],
    ));
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    let episodes = csv_rows(&dir.path().join("b/episodes.csv"));
    let seeds: Vec<&str> = episodes.iter().map(|r| r.get(0).unwrap()).collect();
    assert_eq!(seeds, ["10", "11", "12"]);
    let successes = episodes.iter().filter(|r| &r[1] == "true").count();
    assert_eq!(report["episodes"], 3);
    assert_eq!(report["successes"], successes);
    let file: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("b/report.json")).unwrap()).unwrap();
    assert_eq!(file["report"], report);
    assert!(file["timing"]["steps"].as_u64().unwrap() > 0);
}

#[test]
fn generated_map_is_accepted_as_config() {
    let dir = tempfile::tempdir().unwrap();
    ok(&pursuit(dir.path(), &["gen-map", "--map", "rand20", "--seed", "5", "--out", "m.toml"]));
    let via_flag = ok(&pursuit(dir.path(), &["--config", "m.toml", "run", "--seed", "5", "--out", "a"]));
    let via_env = Command::new(env!("CARGO_BIN_EXE_pursuit"))
        .args(["run", "--seed", "5", "--out", "b"])
        .current_dir(dir.path())
        .env("PURSUIT_CONFIG", "m.toml")
        .output()
        .unwrap();
    assert_eq!(via_flag, ok(&via_env));
    let builtin = ok(&pursuit(dir.path(), &["run", "--map", "rand20", "--seed", "5", "--out", "c"]));
    assert_eq!(via_flag, builtin);
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "bogus = 1\n").unwrap();
    assert_eq!(pursuit(dir.path(), &["--config", "bad.toml", "run"]).status.code(), Some(2));
    assert_eq!(pursuit(dir.path(), &["--config", "missing.toml", "run"]).status.code(), Some(2));

    ok(&pursuit(dir.path(), &["gen-map", "--map", "train10", "--out", "m.toml"]));
    let text = fs::read_to_string(dir.path().join("m.toml")).unwrap();
    fs::write(dir.path().join("neg.toml"), text.replace("width_m = 10.0", "width_m = -10.0")).unwrap();
    let out = pursuit(dir.path(), &["--config", "neg.toml", "run"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid configuration"));
}

#[test]
fn usage_errors_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!pursuit(dir.path(), &["run", "--stage", "6"]).status.success());
    assert!(!pursuit(dir.path(), &["run", "--map", "rand99"]).status.success());
    assert_eq!(pursuit(dir.path(), &["run", "--policy", "scripted"]).status.code(), Some(1));
    assert_eq!(pursuit(dir.path(), &["batch", "--episodes", "0"]).status.code(), Some(1));
}
