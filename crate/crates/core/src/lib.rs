//! Headless 2D robot-navigation simulator with a deep Q-learning trainer.
//!
//! The crate is layered bottom-up:
//!
//! - [`sim`]: geometry, lidar raycasting, differential-drive kinematics, collision queries
//! - [`stages`]: randomized static / dynamic / semantic training stages
//! - [`env`]: the episode engine (actions, rewards, observation packing, scan noise)
//! - [`nn`]: a small dense Q-network with backprop, Adam and binary checkpoints
//! - [`rl`]: replay buffer, epsilon schedule and the DQN training loop
//! - [`harness`]: run configuration, step logs, replay audit, evaluation protocol and metrics

pub mod env;
pub mod error;
pub mod harness;
pub mod nn;
pub mod rl;
pub mod rng;
pub mod sim;
pub mod stages;

pub use error::{Error, Result};
