use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn eleanor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eleanor")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const RUN: &str = r#"{
    "env": {"generator": "tabular", "n_states": 3, "n_actions": 2, "horizon": 3, "seed": 1},
    "agent": {"name": "eleanor"},
    "episodes": 6,
    "seeds": [0, 1]
}"#;

#[test]
fn run_writes_seed_and_aggregate_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), RUN);
    let out = dir.path().join("out");
    let res = eleanor(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let seed0 = fs::read_to_string(out.join("seed_0.csv")).unwrap();
    let lines: Vec<&str> = seed0.lines().collect();
    assert_eq!(lines[0], "episode,per_episode_regret,cumulative_regret,planned_value,vstar");
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("1,"));
    let agg = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    assert!(agg.starts_with("episode,mean_cum,regret_p10,regret_p90,n_seeds\n"));
    assert!(agg.lines().nth(1).unwrap().ends_with(",2"));

    // same config, same bytes
    let again = dir.path().join("again");
    assert!(eleanor(&["run", "--config", &cfg, "--out", again.to_str().unwrap()]).status.success());
    for name in ["seed_0.csv", "seed_1.csv", "aggregate.csv"] {
        assert_eq!(fs::read(out.join(name)).unwrap(), fs::read(again.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn seed_and_episode_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), RUN);
    let out = dir.path().join("out");
    let res = eleanor(&["--seed", "9", "--episodes", "3", "run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    assert!(!out.join("seed_0.csv").exists());
    assert_eq!(fs::read_to_string(out.join("seed_9.csv")).unwrap().lines().count(), 4);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &RUN.replace("\"episodes\"", "\"episodez\""));
    let res = eleanor(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("episodez"));

    let missing = dir.path().join("missing.json");
    assert_eq!(eleanor(&["run", "--config", missing.to_str().unwrap(), "--out", "x"]).status.code(), Some(2));
    let cfg = write_config(dir.path(), RUN);
    assert_eq!(eleanor(&["run", "--config", &cfg]).status.code(), Some(2), "no output directory");
    assert_eq!(eleanor(&["ibe", "--env", "warp:d=1"]).status.code(), Some(2));
    assert_eq!(eleanor(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn ibe_prints_one_row_per_step() {
    let res = eleanor(&["ibe", "--env", "tabular:n_states=3,n_actions=2,horizon=3,seed=0", "--budget", "16"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = String::from_utf8(res.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,ihat,inner_gap,budget");
    assert_eq!(lines.len(), 4);
    for (i, line) in lines[1..].iter().enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0], (i + 1).to_string());
        assert!(cols[1].parse::<f64>().unwrap() <= 1e-6);
        assert_eq!(cols[3], "16");
    }
}

#[test]
fn ibe_reads_env_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.json");
    eleanor_core::envs::make_hard_bandit(2, 0.0, 0.2).unwrap().save(&path).unwrap();
    let res = eleanor(&["ibe", "--env", path.to_str().unwrap(), "--budget", "8"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(String::from_utf8(res.stdout).unwrap().lines().count(), 2);
}

#[test]
fn sweep_isolates_failing_cells() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        r#"{{"base": {}, "axes": [{{"name": "agent", "paths": ["/agent/name"], "values": ["uniform_random", "nonsense"]}}]}}"#,
        RUN
    );
    let cfg = write_config(dir.path(), &body);
    let out = dir.path().join("sweep");
    let res = eleanor(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "cell,agent,final_regret_mean,final_regret_std,slope,error");
    assert!(lines[1].ends_with(','), "first cell has no error: {}", lines[1]);
    assert!(lines[2].contains("nonsense"));
    assert!(lines[2].contains("NaN"));
}

#[test]
fn oracle_check_prints_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"instances": 4, "resolution": 9, "max_horizon": 2}"#);
    let res = eleanor(&["oracle-check", "--config", &cfg]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stdout));
    let text = String::from_utf8(res.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.ends_with("pass")).count(), 4);
    assert!(text.contains("4/4 passed"));
}
