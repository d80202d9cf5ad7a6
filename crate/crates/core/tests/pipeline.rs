use arena2d::env::EnvConfig;
use arena2d::harness::{
    cmd_eval, cmd_train, polyline_length, write_metrics_from_runs, EvalConfig, RunConfig, RunOutcome,
};
use arena2d::sim::Point;
use arena2d::stages::{StageKind, StageSpec};

fn tiny(out: &std::path::Path, kind: StageKind) -> RunConfig {
    let mut cfg = RunConfig {
        out_dir: out.to_path_buf(),
        stage: StageSpec::preset(kind, 5),
        env: EnvConfig {
            n_beams: 12,
            dt: 0.5,
            max_episode_steps: 120,
            ..EnvConfig::default()
        },
        ..RunConfig::default()
    };
    cfg.network.hidden = vec![24];
    cfg.train.max_steps = 1500;
    cfg.train.epsilon_max_steps = 1000;
    cfg
}

#[test]
fn train_then_evaluate_dynamic_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(&dir.path().join("train"), StageKind::Dynamic);
    let trained = cmd_train(&cfg).unwrap();
    assert_eq!(trained.outcome.steps, 1500);
    assert!(trained.step_log.as_ref().unwrap().exists());

    let eval = EvalConfig {
        goals: vec![Point::new(0.3, 0.3), Point::new(-0.5, 0.2)],
        timeout_s: 10.0,
        max_attempts_per_goal: 4,
        ..EvalConfig::default()
    };
    let out = cmd_eval(&cfg, &trained.checkpoint, &eval, &dir.path().join("eval"), "tiny").unwrap();
    let report = &out.report;
    assert!(!report.runs.is_empty());
    for r in &report.runs {
        // odometry sum and logged polyline agree
        assert!((r.path_length - polyline_length(&r.trajectory)).abs() < 1e-6);
        assert!((r.time_s - r.steps as f64 * cfg.env.dt).abs() < 1e-9);
        assert_eq!(r.trajectory.len(), r.steps + 1);
        assert!(r.steps <= 20);
        if r.outcome == RunOutcome::Success {
            assert!(r.trajectory.last().unwrap().distance(r.goal) <= cfg.stage.goal_radius + 1e-12);
        }
    }
    let s = &report.summary;
    assert_eq!(s.successes + s.failures, report.runs.len());

    let (summaries, csv) = write_metrics_from_runs(std::slice::from_ref(&out.runs), 3, &dir.path().join("m")).unwrap();
    assert_eq!(summaries.len(), 1);
    assert_eq!(summaries[0].successes, s.successes);
    assert_eq!(
        std::fs::read_to_string(csv).unwrap(),
        std::fs::read_to_string(&out.metrics_csv).unwrap()
    );
}

#[test]
fn semantic_and_static_widths_differ_by_slots() {
    let dir = tempfile::tempdir().unwrap();
    let mut widths = Vec::new();
    for kind in [StageKind::Static, StageKind::Semantic] {
        let mut cfg = tiny(&dir.path().join(kind.to_string()), kind);
        cfg.train.max_steps = 10;
        cfg.step_log = false;
        let out = cmd_train(&cfg).unwrap();
        assert!(out.step_log.is_none());
        widths.push(out.outcome.online.input_dim());
    }
    assert_eq!(widths, vec![12 + 2, 12 + 2 + 4]);
}

#[test]
fn spec_sized_inputs_without_goal_slot() {
    let mut cfg = RunConfig::default();
    cfg.env.goal_inputs = false;
    assert_eq!(cfg.env.layout(true).input_dim(), 364);
    assert_eq!(cfg.env.layout(false).input_dim(), 360);
    cfg.env.goal_inputs = true;
    assert_eq!(cfg.env.layout(true).input_dim(), 366);
}
