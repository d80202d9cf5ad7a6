use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::env::Env;
use crate::error::{Error, Result};
use crate::nn::{load_checkpoint, save_checkpoint, AdamState, QNetwork};
use crate::rl::{train_loop, EpisodeRecord, PreStep, TrainObserver, TrainOutcome};

use super::config::RunConfig;
use super::eval::{evaluate, run_policy, EvalConfig, EvalReport, MetricsSummary, RunOutcome, RunRecord};
use super::metrics::write_metrics;
use super::steplog::{read_step_log, replay, ReplayReport, StepLogHeader, StepLogWriter, StepRecord};

#[derive(Debug)]
pub struct TrainRunOutput {
    pub out_dir: PathBuf,
    pub checkpoint: PathBuf,
    pub train_log: PathBuf,
    pub step_log: Option<PathBuf>,
    pub outcome: TrainOutcome,
}

struct FileObserver {
    train_log: BufWriter<File>,
    train_log_path: PathBuf,
    steps: Option<StepLogWriter>,
    checkpoint_dir: PathBuf,
    episode: u64,
}

impl TrainObserver for FileObserver {
    fn on_step(&mut self, t: u64, pre: &PreStep) -> Result<()> {
        if let Some(w) = &mut self.steps {
            w.write(&StepRecord::new(t - 1, self.episode + 1, pre.action, &pre.result))?;
        }
        if pre.finished.is_some() {
            self.episode += 1;
        }
        Ok(())
    }

    fn on_episode(&mut self, record: &EpisodeRecord) -> Result<()> {
        let line = serde_json::to_string(record)?;
        writeln!(self.train_log, "{line}").map_err(|e| Error::io(&self.train_log_path, e))
    }

    fn on_checkpoint(&mut self, t: u64, net: &QNetwork, adam: &AdamState) -> Result<()> {
        fs::create_dir_all(&self.checkpoint_dir).map_err(|e| Error::io(&self.checkpoint_dir, e))?;
        save_checkpoint(net, adam, &self.checkpoint_dir.join(format!("step_{t:08}.a2dq")))
    }
}

fn write_snapshot<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = toml::to_string(value).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Trains a network and writes `config.toml`, `train_log.jsonl`, the step
/// log, periodic checkpoints and `checkpoint.a2dq` into `cfg.out_dir`.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainRunOutput> {
    cfg.validate()?;
    let dir = cfg.out_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_snapshot(cfg, &dir.join("config.toml"))?;

    let train_log_path = dir.join("train_log.jsonl");
    let train_log = BufWriter::new(File::create(&train_log_path).map_err(|e| Error::io(&train_log_path, e))?);
    let step_log_path = cfg.step_log.then(|| {
        dir.join(if cfg.compress_step_log {
            "steps.jsonl.gz"
        } else {
            "steps.jsonl"
        })
    });
    let steps = match &step_log_path {
        Some(p) => Some(StepLogWriter::create(
            p,
            &StepLogHeader::new(cfg.seed, &cfg.stage, &cfg.env),
        )?),
        None => None,
    };
    let mut observer = FileObserver {
        train_log,
        train_log_path: train_log_path.clone(),
        steps,
        checkpoint_dir: dir.join("checkpoints"),
        episode: 0,
    };

    let env = Env::new(&cfg.stage, cfg.env.clone())?;
    let outcome = train_loop(&cfg.train, &cfg.network, env, cfg.seed, &mut observer)?;

    observer.train_log.flush().map_err(|e| Error::io(&train_log_path, e))?;
    if let Some(w) = observer.steps.take() {
        w.finish()?;
    }
    let checkpoint = dir.join("checkpoint.a2dq");
    save_checkpoint(&outcome.online, &outcome.adam, &checkpoint)?;
    Ok(TrainRunOutput {
        out_dir: dir,
        checkpoint,
        train_log: train_log_path,
        step_log: step_log_path,
        outcome,
    })
}

#[derive(Debug)]
pub struct EvalRunOutput {
    pub report: EvalReport,
    pub metrics_csv: PathBuf,
    pub runs: PathBuf,
}

#[derive(Serialize)]
struct EvalSnapshot<'a> {
    approach: &'a str,
    checkpoint: &'a Path,
    eval: &'a EvalConfig,
    run: &'a RunConfig,
}

fn write_runs(runs: &[RunRecord], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for r in runs {
        let line = serde_json::to_string(r)?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Evaluates a checkpoint greedily on the goal list and writes the metrics,
/// per-run records and trajectories into `out`.
pub fn cmd_eval(
    cfg: &RunConfig,
    checkpoint: &Path,
    eval: &EvalConfig,
    out: &Path,
    approach: &str,
) -> Result<EvalRunOutput> {
    cfg.validate()?;
    eval.validate()?;
    let net = load_checkpoint(checkpoint)?.net;
    let layout = cfg.env.layout(cfg.stage.kind.semantic_inputs());
    net.expect_dims(layout.input_dim(), cfg.train.num_actions)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_snapshot(
        &EvalSnapshot {
            approach,
            checkpoint,
            eval,
            run: cfg,
        },
        &out.join("eval_config.toml"),
    )?;

    let report = evaluate(approach, eval, |gi, goal, attempt| {
        let seed = eval.attempt_seed(gi, attempt);
        let mut r = run_policy(&net, &cfg.stage, &cfg.env, goal, seed, eval.timeout_s)?;
        r.approach = approach.to_string();
        r.goal_index = gi;
        r.attempt = attempt;
        Ok(r)
    })?;
    let runs = out.join("runs.jsonl");
    write_runs(&report.runs, &runs)?;
    let metrics_csv = write_metrics(std::slice::from_ref(&report), out)?;
    Ok(EvalRunOutput {
        report,
        metrics_csv,
        runs,
    })
}

pub fn cmd_replay(log: &Path) -> Result<ReplayReport> {
    let (header, records) = read_step_log(log)?;
    replay(&header, &records)
}

/// Rebuilds summaries from one or more `runs.jsonl` files and writes the
/// metrics CSV and trajectories. A goal counts as complete once it has
/// `runs_per_goal` successes.
pub fn write_metrics_from_runs(
    files: &[PathBuf],
    runs_per_goal: usize,
    out: &Path,
) -> Result<(Vec<MetricsSummary>, PathBuf)> {
    let mut by_approach: Vec<(String, Vec<RunRecord>)> = Vec::new();
    for path in files {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        for line in BufReader::new(f).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let r: RunRecord = serde_json::from_str(&line)?;
            match by_approach.iter_mut().find(|(a, _)| *a == r.approach) {
                Some((_, runs)) => runs.push(r),
                None => by_approach.push((r.approach.clone(), vec![r])),
            }
        }
    }
    let reports: Vec<EvalReport> = by_approach
        .into_iter()
        .map(|(approach, runs)| {
            let mut per_goal: BTreeMap<usize, usize> = BTreeMap::new();
            for r in &runs {
                *per_goal.entry(r.goal_index).or_default() += usize::from(r.outcome == RunOutcome::Success);
            }
            let complete = per_goal.values().all(|&s| s >= runs_per_goal);
            EvalReport {
                summary: MetricsSummary::from_runs(&approach, &runs, complete),
                runs,
            }
        })
        .collect();
    let csv = write_metrics(&reports, out)?;
    Ok((reports.into_iter().map(|r| r.summary).collect(), csv))
}
