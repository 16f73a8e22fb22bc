use convoy_core::metrics::{header, MetricsTable, RunSummary};
use convoy_core::plot::plot_metrics;
use convoy_core::scenario::bundled;
use convoy_core::{load_scenario, run_scenario, Error, RunOptions};

#[test]
fn zero_duration_writes_header_only() {
    let mut cfg = bundled("matlab_sim_3").unwrap();
    cfg.duration = 0.0;
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario(&cfg, dir.path(), &RunOptions::default()).unwrap();
    let text = std::fs::read_to_string(&out.metrics_path).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert_eq!(text.trim_end(), header(cfg.n_a, cfg.n_t).join(","));
    assert_eq!(out.summary.ticks, 0);
    assert_eq!(out.summary.settling_time, None);
}

#[test]
fn outputs_agree_with_each_other() {
    let mut cfg = bundled("hardware_exp_1").unwrap();
    cfg.duration = 30.0;
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        jsonl: true,
        keep_records: true,
    };
    let out = run_scenario(&cfg, dir.path(), &opts).unwrap();
    assert_eq!(out.records.len(), 1500);

    let table = MetricsTable::read(&out.metrics_path).unwrap();
    assert_eq!(table.records().unwrap(), out.records);

    let jsonl = std::fs::read_to_string(out.metrics_path.with_extension("jsonl")).unwrap();
    let lines: Vec<&str> = jsonl.lines().collect();
    assert_eq!(lines.len(), 1500);
    let last: serde_json::Value = serde_json::from_str(lines[1499]).unwrap();
    assert_eq!(last["a2_gamma"].as_f64().unwrap(), out.records[1499].agents[1].gamma);

    let summary: RunSummary = serde_json::from_str(&std::fs::read_to_string(&out.summary_path).unwrap()).unwrap();
    assert_eq!(summary, out.summary);

    let plots = plot_metrics(&table, &dir.path().join("plots")).unwrap();
    assert_eq!(plots.len(), 6);
    for p in plots {
        assert!(std::fs::read_to_string(p).unwrap().contains("<polyline"));
    }
}

#[test]
fn load_errors_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    assert!(matches!(load_scenario(&missing), Err(Error::Io { .. })));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "name = \"x\"\nn_t = \"six\"\n").unwrap();
    let msg = load_scenario(&bad).unwrap_err().to_string();
    assert!(msg.contains("bad.toml") && msg.contains("n_t"), "{msg}");
}
