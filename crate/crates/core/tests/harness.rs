use eleanor_core::harness::{default_window, fit_scaling, run_experiment, run_sweep, SweepConfig};
use eleanor_core::ExperimentConfig;
use serde_json::json;

fn base() -> serde_json::Value {
    json!({
        "env": {"generator": "linear", "d": 2, "n_states": 3, "n_actions": 2, "horizon": 2, "seed": 3},
        "agent": {"name": "eleanor", "radius": {"c1": 0.5}},
        "episodes": 12,
        "seeds": [0, 1, 2]
    })
}

#[test]
fn runs_are_deterministic() {
    let cfg: ExperimentConfig = serde_json::from_value(base()).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_experiment(&cfg, Some(a.path())).unwrap();
    let rb = run_experiment(&cfg, Some(b.path())).unwrap();
    assert_eq!(ra, rb);
    for name in ["seed_0.csv", "seed_1.csv", "seed_2.csv", "aggregate.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }
}

#[test]
fn regret_rows_are_consistent() {
    let cfg: ExperimentConfig = serde_json::from_value(base()).unwrap();
    let result = run_experiment(&cfg, None).unwrap();
    for curve in &result.curves {
        let mut cum = 0.0;
        for row in &curve.rows {
            assert!(row.per_episode_regret >= -1e-12, "regret is never negative");
            cum += row.per_episode_regret;
            assert!((row.cumulative_regret - cum).abs() < 1e-9);
            assert!(row.planned_value.is_some());
        }
    }
}

#[test]
fn single_episode_gives_single_row() {
    let mut doc = base();
    doc["episodes"] = json!(1);
    let cfg: ExperimentConfig = serde_json::from_value(doc).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let result = run_experiment(&cfg, Some(dir.path())).unwrap();
    assert_eq!(result.aggregate.len(), 1);
    let text = std::fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    let fit = fit_scaling(&result.mean_curve(), default_window(1));
    assert!(fit.flag.is_some());
}

#[test]
fn one_cell_sweep_matches_a_run() {
    let sweep = SweepConfig {
        base: base(),
        axes: vec![serde_json::from_value(json!({"name": "c1", "paths": ["/agent/radius/c1"], "values": [0.5]})).unwrap()],
        output_dir: None,
    };
    let cells = run_sweep(&sweep, None).unwrap();
    assert_eq!(cells.len(), 1);
    let cfg: ExperimentConfig = serde_json::from_value(base()).unwrap();
    let result = run_experiment(&cfg, None).unwrap();
    let finals = result.final_regrets();
    let mean = finals.iter().sum::<f64>() / finals.len() as f64;
    assert_eq!(cells[0].final_regret_mean, mean);
    let fit = fit_scaling(&result.mean_curve(), default_window(cfg.episodes));
    assert_eq!(cells[0].slope, fit.slope);
    assert!(cells[0].error.is_none());
}
