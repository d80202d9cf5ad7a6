use std::collections::VecDeque;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::replay::{ReplayBuffer, Transition};
use super::schedule::epsilon_at;
use crate::env::{Env, Event, StepResult};
use crate::error::{Error, Result};
use crate::nn::{adam_step, mse_loss_and_grad, sync_target, AdamState, NetworkConfig, QNetwork, Tensor};
use crate::rng::{stream, RngStream, Stream};
use crate::sim::Action;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Training stops once the windowed success rate reaches this value.
    pub mean_success_bound: f64,
    pub num_actions: usize,
    pub gamma: f32,
    pub sync_target_steps: u64,
    pub learning_rate: f32,
    pub epsilon_start: f64,
    pub epsilon_max_steps: u64,
    pub epsilon_end: f64,
    pub batch_size: usize,
    pub training_start: usize,
    pub memory_size: usize,
    /// Episodes in the success-rate window.
    pub success_window: usize,
    /// Hard step budget.
    pub max_steps: u64,
    /// Steps between periodic checkpoints; 0 disables them.
    pub checkpoint_interval: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mean_success_bound: 1.0,
            num_actions: Action::COUNT,
            gamma: 0.99,
            sync_target_steps: 2000,
            learning_rate: 0.00025,
            epsilon_start: 1.0,
            epsilon_max_steps: 100_000,
            epsilon_end: 0.05,
            batch_size: 64,
            training_start: 64,
            memory_size: 1_000_000,
            success_window: 100,
            max_steps: 300_000,
            checkpoint_interval: 50_000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.num_actions != Action::COUNT {
            return fail(format!("train.num_actions must be {}", Action::COUNT));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return fail(format!("train.gamma {} outside [0, 1]", self.gamma));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return fail("train.learning_rate must be >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.epsilon_end) || !(0.0..=1.0).contains(&self.epsilon_start) {
            return fail("train.epsilon_start and epsilon_end must lie in [0, 1]".into());
        }
        if self.epsilon_end > self.epsilon_start {
            return fail("train.epsilon_end exceeds epsilon_start".into());
        }
        if self.batch_size == 0 || self.memory_size == 0 || self.success_window == 0 || self.sync_target_steps == 0 {
            return fail("train.batch_size, memory_size, success_window and sync_target_steps must be >= 1".into());
        }
        if !self.mean_success_bound.is_finite() {
            return fail("train.mean_success_bound must be finite".into());
        }
        Ok(())
    }

    pub fn epsilon(&self, t: u64) -> f64 {
        epsilon_at(t, self.epsilon_max_steps, self.epsilon_start, self.epsilon_end)
    }
}

/// Independent random streams of one training run.
pub struct TrainRngs {
    pub explore: RngStream,
    pub replay: RngStream,
    pub dropout: RngStream,
}

impl TrainRngs {
    pub fn from_seed(seed: u64) -> Self {
        TrainRngs {
            explore: stream(seed, Stream::Exploration),
            replay: stream(seed, Stream::Replay),
            dropout: stream(seed, Stream::Dropout),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    /// Global step counter.
    pub t: u64,
    pub epsilon: f64,
    pub episodes: u64,
    outcomes: VecDeque<bool>,
    window: usize,
    episode_return: f64,
    episode_steps: u64,
}

impl TrainState {
    pub fn new(cfg: &TrainConfig) -> Self {
        TrainState {
            t: 0,
            epsilon: cfg.epsilon(0),
            episodes: 0,
            outcomes: VecDeque::with_capacity(cfg.success_window),
            window: cfg.success_window,
            episode_return: 0.0,
            episode_steps: 0,
        }
    }

    /// Successes among the last `window` episodes divided by `window`;
    /// episodes not yet played count as failures.
    pub fn mean_success(&self) -> f64 {
        self.outcomes.iter().filter(|s| **s).count() as f64 / self.window as f64
    }

    pub fn record_outcome(&mut self, success: bool) {
        if self.outcomes.len() == self.window {
            self.outcomes.pop_front();
        }
        self.outcomes.push_back(success);
    }
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: u64,
    pub steps: u64,
    #[serde(rename = "return")]
    pub episode_return: f64,
    pub outcome: Event,
    pub epsilon: f64,
    pub mean_success: f64,
}

#[derive(Debug, Clone)]
pub struct PreStep {
    pub action: usize,
    pub result: StepResult,
    pub finished: Option<EpisodeRecord>,
}

/// Epsilon-greedy choice: a uniform action with probability `epsilon`,
/// otherwise the greedy action under evaluation-mode `net`.
pub fn select_action<R: Rng + ?Sized>(net: &QNetwork, features: &[f32], epsilon: f64, rng: &mut R) -> Result<usize> {
    if rng.random::<f64>() < epsilon {
        Ok(rng.random_range(0..Action::COUNT))
    } else {
        net.greedy_action(features)
    }
}

/// Acts once in `env`, stores the transition and resets the env at episode end.
pub fn pre_step<R: Rng + ?Sized>(
    env: &mut Env,
    net: &QNetwork,
    buffer: &mut ReplayBuffer,
    state: &mut TrainState,
    rng: &mut R,
) -> Result<PreStep> {
    let s = env.features();
    let a = select_action(net, &s, state.epsilon, rng)?;
    let result = env.step(Action::from_index(a)?)?;
    let s_next = env.features();
    buffer.insert(Transition {
        s,
        s_next,
        a,
        r: result.reward as f32,
        done: result.done,
    });
    state.episode_return += result.reward;
    state.episode_steps += 1;
    let finished = if result.done {
        state.episodes += 1;
        state.record_outcome(result.event == Event::GoalReached);
        let record = EpisodeRecord {
            episode: state.episodes,
            steps: state.episode_steps,
            episode_return: state.episode_return,
            outcome: result.event,
            epsilon: state.epsilon,
            mean_success: state.mean_success(),
        };
        state.episode_return = 0.0;
        state.episode_steps = 0;
        env.reset()?;
        Some(record)
    } else {
        None
    };
    state.t += 1;
    Ok(PreStep {
        action: a,
        result,
        finished,
    })
}

/// `y = r` for terminal transitions, else `r + gamma * max_a target(s', a)`.
pub fn bellman_targets(batch: &[&Transition], target: &QNetwork, gamma: f32) -> Result<Vec<f32>> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let next: Vec<&[f32]> = batch.iter().map(|t| t.s_next.as_slice()).collect();
    let q_next = target.forward(&Tensor::from_rows(&next)?, None)?;
    Ok(batch
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if t.done {
                t.r
            } else {
                let best = q_next.row(i).iter().copied().fold(f32::NEG_INFINITY, f32::max);
                t.r + gamma * best
            }
        })
        .collect())
}

/// Learns from one replay batch, syncs the target every `sync_target_steps`
/// global steps and refreshes epsilon. Returns the batch loss when a
/// gradient step ran.
#[allow(clippy::too_many_arguments)]
pub fn post_step(
    online: &mut QNetwork,
    target: &mut QNetwork,
    adam: &mut AdamState,
    buffer: &ReplayBuffer,
    state: &mut TrainState,
    cfg: &TrainConfig,
    replay_rng: &mut dyn RngCore,
    dropout_rng: &mut dyn RngCore,
) -> Result<Option<f32>> {
    let mut loss = None;
    if buffer.len() >= cfg.training_start.max(1) {
        let batch = buffer.sample(cfg.batch_size, replay_rng);
        let targets = bellman_targets(&batch, target, cfg.gamma)?;
        let states: Vec<&[f32]> = batch.iter().map(|t| t.s.as_slice()).collect();
        let actions: Vec<usize> = batch.iter().map(|t| t.a).collect();
        let (l, grads) = mse_loss_and_grad(
            online,
            &Tensor::from_rows(&states)?,
            &actions,
            &targets,
            Some(dropout_rng),
        )?;
        adam_step(online, &grads, adam)?;
        loss = Some(l);
    }
    if state.t.is_multiple_of(cfg.sync_target_steps) {
        *target = sync_target(online);
    }
    state.epsilon = cfg.epsilon(state.t);
    Ok(loss)
}

/// Hooks for logging and checkpointing during [`train_loop`].
pub trait TrainObserver {
    fn on_step(&mut self, _t: u64, _pre: &PreStep) -> Result<()> {
        Ok(())
    }
    fn on_episode(&mut self, _record: &EpisodeRecord) -> Result<()> {
        Ok(())
    }
    fn on_checkpoint(&mut self, _t: u64, _net: &QNetwork, _adam: &AdamState) -> Result<()> {
        Ok(())
    }
}

pub struct NoopObserver;

impl TrainObserver for NoopObserver {}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub online: QNetwork,
    pub target: QNetwork,
    pub adam: AdamState,
    pub records: Vec<EpisodeRecord>,
    pub steps: u64,
    pub converged: bool,
    /// Highest windowed success rate seen.
    pub best_mean_success: f64,
}

/// Alternates [`pre_step`] and [`post_step`] until the success bound or the
/// step budget is reached.
pub fn train_loop(
    cfg: &TrainConfig,
    net_cfg: &NetworkConfig,
    mut env: Env,
    seed: u64,
    observer: &mut dyn TrainObserver,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let input = env.layout().input_dim();
    let mut online = QNetwork::new(input, net_cfg, cfg.num_actions, &mut stream(seed, Stream::Init))?;
    let mut target = sync_target(&online);
    let mut adam = AdamState::new(&online, cfg.learning_rate);
    let mut buffer = ReplayBuffer::new(cfg.memory_size);
    let mut state = TrainState::new(cfg);
    let mut rngs = TrainRngs::from_seed(seed);
    let mut records = Vec::new();
    let mut converged = false;
    let mut best = 0.0f64;

    env.restart()?;
    while state.t < cfg.max_steps {
        let pre = pre_step(&mut env, &online, &mut buffer, &mut state, &mut rngs.explore)?;
        observer.on_step(state.t, &pre)?;
        post_step(
            &mut online,
            &mut target,
            &mut adam,
            &buffer,
            &mut state,
            cfg,
            &mut rngs.replay,
            &mut rngs.dropout,
        )?;
        if cfg.checkpoint_interval > 0 && state.t.is_multiple_of(cfg.checkpoint_interval) {
            observer.on_checkpoint(state.t, &online, &adam)?;
        }
        if let Some(record) = pre.finished {
            best = best.max(record.mean_success);
            observer.on_episode(&record)?;
            let done = record.mean_success >= cfg.mean_success_bound;
            records.push(record);
            if done {
                converged = true;
                break;
            }
        }
    }
    Ok(TrainOutcome {
        online,
        target,
        adam,
        records,
        steps: state.t,
        converged,
        best_mean_success: best,
    })
}
