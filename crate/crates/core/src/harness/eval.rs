use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::{Env, EnvConfig, Event};
use crate::error::{Error, Result};
use crate::nn::QNetwork;
use crate::sim::{Action, Point};
use crate::stages::{GoalSpec, StageSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub goals: Vec<Point>,
    /// Successful runs required per goal.
    pub runs_per_goal: usize,
    pub timeout_s: f64,
    /// Attempts per goal before giving up on it.
    pub max_attempts_per_goal: usize,
    /// Base seed; every attempt gets its own derived seed.
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            goals: default_goals(),
            runs_per_goal: 3,
            timeout_s: 60.0,
            max_attempts_per_goal: 10,
            seed: 0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.goals.is_empty() {
            return Err(Error::Config("evaluation needs at least one goal".into()));
        }
        if self.goals.iter().any(|g| !(g.x.is_finite() && g.y.is_finite())) {
            return Err(Error::NonFinite("goal position"));
        }
        if !(self.timeout_s.is_finite() && self.timeout_s > 0.0) {
            return Err(Error::Config(format!("timeout {} s must be > 0", self.timeout_s)));
        }
        if self.runs_per_goal == 0 || self.max_attempts_per_goal < self.runs_per_goal {
            return Err(Error::Config(
                "runs_per_goal must be >= 1 and max_attempts_per_goal >= runs_per_goal".into(),
            ));
        }
        Ok(())
    }

    pub fn attempt_seed(&self, goal_index: usize, attempt: usize) -> u64 {
        self.seed
            .wrapping_add((goal_index * self.max_attempts_per_goal + attempt) as u64)
    }
}

/// Ten goals evenly spaced in distance from 0.2 m to 2.5 m, rotating through
/// the four diagonals.
pub fn default_goals() -> Vec<Point> {
    (0..10)
        .map(|k| {
            let d = 0.2 + k as f64 * 2.3 / 9.0;
            let angle = (45.0 + 90.0 * k as f64).to_radians();
            Point::from_polar(d, angle)
        })
        .collect()
}

#[derive(Debug, Deserialize)]
struct GoalRow {
    x: f64,
    y: f64,
}

/// Reads a goal list from a CSV file with an `x,y` header.
pub fn load_goals(path: &Path) -> Result<Vec<Point>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut goals = Vec::new();
    for row in reader.deserialize() {
        let row: GoalRow = row?;
        goals.push(Point::new(row.x, row.y));
    }
    if goals.is_empty() {
        return Err(Error::Config(format!("{} lists no goals", path.display())));
    }
    Ok(goals)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    Success,
    Timeout,
    LeftArena,
}

/// One evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub approach: String,
    pub goal_index: usize,
    pub attempt: usize,
    pub goal: Point,
    pub outcome: RunOutcome,
    pub steps: usize,
    /// Simulated seconds, `steps * dt`.
    pub time_s: f64,
    /// Sum of per-step displacements, meters.
    pub path_length: f64,
    /// Contact onsets during the run.
    pub contacts: usize,
    pub min_d_human: f64,
    /// Robot positions, starting with the spawn point.
    pub trajectory: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub approach: String,
    /// Mean path length of successful runs, meters.
    pub mean_distance: f64,
    /// Mean duration of successful runs, seconds.
    pub mean_time: f64,
    /// `100 * failures / successes`.
    pub error_rate: f64,
    /// Contacts summed over successful runs.
    pub obstacles_hit: usize,
    pub successes: usize,
    pub failures: usize,
    /// Every goal collected its required successes.
    pub complete: bool,
}

impl MetricsSummary {
    pub fn from_runs(approach: &str, runs: &[RunRecord], complete: bool) -> Self {
        let ok: Vec<&RunRecord> = runs.iter().filter(|r| r.outcome == RunOutcome::Success).collect();
        let successes = ok.len();
        let failures = runs.len() - successes;
        let mean = |f: fn(&RunRecord) -> f64| {
            if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().map(|r| f(r)).sum::<f64>() / successes as f64
            }
        };
        let error_rate = match (failures, successes) {
            (0, _) => 0.0,
            (_, 0) => f64::INFINITY,
            (f, s) => 100.0 * f as f64 / s as f64,
        };
        MetricsSummary {
            approach: approach.to_string(),
            mean_distance: mean(|r| r.path_length),
            mean_time: mean(|r| r.time_s),
            error_rate,
            obstacles_hit: ok.iter().map(|r| r.contacts).sum(),
            successes,
            failures,
            complete,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub summary: MetricsSummary,
    pub runs: Vec<RunRecord>,
}

/// Runs every goal until it has `runs_per_goal` successes, re-running failed
/// attempts. `run(goal_index, goal, attempt)` executes one attempt.
pub fn evaluate<F>(approach: &str, cfg: &EvalConfig, mut run: F) -> Result<EvalReport>
where
    F: FnMut(usize, Point, usize) -> Result<RunRecord>,
{
    cfg.validate()?;
    let mut runs = Vec::new();
    let mut complete = true;
    for (gi, &goal) in cfg.goals.iter().enumerate() {
        let mut successes = 0;
        let mut attempt = 0;
        while successes < cfg.runs_per_goal && attempt < cfg.max_attempts_per_goal {
            let record = run(gi, goal, attempt)?;
            if record.outcome == RunOutcome::Success {
                successes += 1;
            }
            runs.push(record);
            attempt += 1;
        }
        complete &= successes == cfg.runs_per_goal;
    }
    Ok(EvalReport {
        summary: MetricsSummary::from_runs(approach, &runs, complete),
        runs,
    })
}

/// Drives a greedy policy from the arena center to `goal`. Contacts block the
/// motion instead of ending the run; the run fails on timeout.
pub fn run_policy(
    net: &QNetwork,
    stage: &StageSpec,
    env_cfg: &EnvConfig,
    goal: Point,
    seed: u64,
    timeout_s: f64,
) -> Result<RunRecord> {
    let spec = StageSpec { seed, ..stage.clone() };
    let cfg = EnvConfig {
        terminate_on_collision: false,
        max_episode_steps: ((timeout_s / env_cfg.dt) - 1e-9).ceil().max(1.0) as usize,
        ..env_cfg.clone()
    };
    let dt = cfg.dt;
    let mut env = Env::new(&spec, cfg)?;
    net.expect_dims(env.layout().input_dim(), Action::COUNT)?;
    env.world_mut().goal = GoalSpec {
        position: goal,
        radius: spec.goal_radius,
    };
    env.restart()?;

    let mut trajectory = vec![env.world().robot.position()];
    let mut path_length = 0.0;
    let mut contacts = 0;
    let mut touching = false;
    let mut min_d_human = env.observation().human.distance;
    let outcome = loop {
        let action = Action::from_index(net.greedy_action(&env.features())?)?;
        let r = env.step(action)?;
        trajectory.push(r.pose.position());
        path_length += r.displacement;
        if r.contact && !touching {
            contacts += 1;
        }
        touching = r.contact;
        min_d_human = min_d_human.min(r.observation.human.distance);
        if !env.world().geometry.contains(r.pose.position()) {
            break RunOutcome::LeftArena;
        }
        match r.event {
            Event::GoalReached => break RunOutcome::Success,
            Event::Timeout | Event::WallHit => break RunOutcome::Timeout,
            Event::None => {}
        }
    };
    let steps = env.steps();
    Ok(RunRecord {
        approach: String::new(),
        goal_index: 0,
        attempt: 0,
        goal,
        outcome,
        steps,
        time_s: steps as f64 * dt,
        path_length,
        contacts,
        min_d_human,
        trajectory,
    })
}
