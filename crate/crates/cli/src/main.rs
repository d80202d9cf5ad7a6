use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use arena2d::harness::{
    cmd_eval, cmd_replay, cmd_train, load_goals, write_metrics_from_runs, EvalConfig, ReplayReport, RunConfig,
    StageChoice,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "arena2d",
    version,
    about = "Headless 2D navigation simulator and DQN trainer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a DQN agent.
    Train {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Evaluate a checkpoint on the goal list.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        /// CSV file with an `x,y` header; defaults to ten goals from 0.2 m to 2.5 m.
        #[arg(long)]
        goals: Option<PathBuf>,
        #[arg(long, default_value_t = 60.0)]
        timeout_s: f64,
        #[arg(long, default_value_t = 3)]
        runs_per_goal: usize,
        #[arg(long, default_value = "dqn")]
        approach: String,
    },
    /// Re-simulate a step log and report the first divergence.
    Replay { log: PathBuf },
    /// Aggregate evaluation run files into a metrics table.
    Metrics {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        runs_per_goal: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; unknown keys are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seeds both the learner and the stage.
    #[arg(long)]
    seed: Option<u64>,
    /// static, dynamic, semantic, or a stage .toml file.
    #[arg(long)]
    stage: Option<StageChoice>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self, fallback: Option<&Path>) -> Result<RunConfig> {
        let path = self.config.as_deref().or(fallback.filter(|p| p.exists()));
        let mut cfg = match path {
            Some(p) => RunConfig::load(p).with_context(|| format!("reading config {}", p.display()))?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.set_seed(seed);
        }
        if let Some(stage) = &self.stage {
            cfg.set_stage(stage).with_context(|| format!("loading stage {stage}"))?;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Train { run } => {
            let cfg = run.resolve(None)?;
            let out = cmd_train(&cfg)?;
            let o = &out.outcome;
            println!(
                "trained {} steps, {} episodes, best mean success {:.3}{}",
                o.steps,
                o.records.len(),
                o.best_mean_success,
                if o.converged { " (bound reached)" } else { "" }
            );
            println!("checkpoint: {}", out.checkpoint.display());
            println!("training log: {}", out.train_log.display());
        }
        Command::Eval {
            run,
            checkpoint,
            goals,
            timeout_s,
            runs_per_goal,
            approach,
        } => {
            let beside = checkpoint.parent().map(|d| d.join("config.toml"));
            let cfg = run.resolve(beside.as_deref())?;
            let mut eval = EvalConfig {
                timeout_s,
                runs_per_goal,
                seed: cfg.seed,
                ..EvalConfig::default()
            };
            eval.max_attempts_per_goal = eval.max_attempts_per_goal.max(runs_per_goal);
            if let Some(g) = &goals {
                eval.goals = load_goals(g).with_context(|| format!("reading goals {}", g.display()))?;
            }
            let out_dir = match &run.out {
                Some(o) => o.clone(),
                None => checkpoint.parent().unwrap_or(Path::new(".")).join("eval"),
            };
            let out = cmd_eval(&cfg, &checkpoint, &eval, &out_dir, &approach)?;
            let s = &out.report.summary;
            println!(
                "{}: {} successes, {} failures, error rate {:.1}%, mean distance {:.3} m, mean time {:.1} s, obstacles hit {}{}",
                s.approach,
                s.successes,
                s.failures,
                s.error_rate,
                s.mean_distance,
                s.mean_time,
                s.obstacles_hit,
                if s.complete { "" } else { " (incomplete: some goals never succeeded)" }
            );
            println!("metrics: {}", out.metrics_csv.display());
        }
        Command::Replay { log } => {
            let report = cmd_replay(&log)?;
            println!("{report}");
            if let ReplayReport::Diverged { .. } = report {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Metrics {
            runs,
            out,
            runs_per_goal,
        } => {
            let (summaries, csv) = write_metrics_from_runs(&runs, runs_per_goal, &out)?;
            println!("{} approaches written to {}", summaries.len(), csv.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
