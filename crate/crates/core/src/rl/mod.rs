//! Deep Q-learning: replay memory, epsilon schedule, the act/learn step pair
//! and the training loop that alternates them.

mod replay;
mod schedule;
mod trainer;

pub use replay::{ReplayBuffer, Transition};
pub use schedule::epsilon_at;
pub use trainer::{
    bellman_targets, post_step, pre_step, select_action, train_loop, EpisodeRecord, NoopObserver, PreStep, TrainConfig,
    TrainObserver, TrainOutcome, TrainRngs, TrainState,
};
