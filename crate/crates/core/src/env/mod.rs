//! The episode engine.
//!
//! An [`Env`] owns one [`WorldState`] and its random stream. Each step maps a
//! discrete action to a velocity pair, integrates the robot, moves dynamic
//! obstacles, evaluates events (goal before collision before timeout),
//! computes the reward and packs the next observation.

mod observation;
mod reward;

use std::f64::consts::FRAC_PI_6;

use serde::{Deserialize, Serialize};

pub use observation::{
    apply_noise, nearest_of_class, pack_observation, Observation, ObservationLayout, Slot, ABSENT_DISTANCE,
    MIN_NOISY_RANGE,
};
pub use reward::{
    compute_reward, RewardFacts, AWAY_FROM_GOAL_PENALTY, COLLISION_PENALTY, GOAL_REWARD, PROXIMITY_PENALTY,
    TOWARD_GOAL_REWARD,
};

use crate::error::{Error, Result};
use crate::rng::{stream, RngStream, Stream};
use crate::sim::{
    check_collision, integrate_motion, raycast_scan, Action, ObstacleClass, Pose, DEFAULT_BEAMS, DEFAULT_MAX_RANGE,
    DEFAULT_ROBOT_RADIUS,
};
use crate::stages::{generate_stage, reset_episode, update_dynamic_obstacles, StageSpec, WorldState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    /// Control period, seconds.
    pub dt: f64,
    /// Standard deviation of additive range noise, meters.
    pub noise_sigma: f64,
    pub human_min_dist: f64,
    pub robot_min_dist: f64,
    /// Half-angle of the "moving towards goal" cone, radians.
    pub heading_threshold: f64,
    pub max_episode_steps: usize,
    pub n_beams: usize,
    pub max_range: f64,
    pub robot_radius: f64,
    /// Feed goal distance and bearing to the network.
    pub goal_inputs: bool,
    /// Divide ranges by `max_range` before they reach the network.
    pub scale_ranges: bool,
    /// End the episode on contact. When false, contacts are recorded and
    /// the offending motion is undone instead.
    pub terminate_on_collision: bool,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            dt: 0.1,
            noise_sigma: 0.0,
            human_min_dist: 0.7,
            robot_min_dist: 0.2,
            heading_threshold: FRAC_PI_6,
            max_episode_steps: 600,
            n_beams: DEFAULT_BEAMS,
            max_range: DEFAULT_MAX_RANGE,
            robot_radius: DEFAULT_ROBOT_RADIUS,
            goal_inputs: true,
            scale_ranges: false,
            terminate_on_collision: true,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("human_min_dist", self.human_min_dist),
            ("robot_min_dist", self.robot_min_dist),
            ("heading_threshold", self.heading_threshold),
            ("max_range", self.max_range),
            ("robot_radius", self.robot_radius),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("env.{name} = {v} must be finite and > 0")));
            }
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::Config(format!(
                "env.noise_sigma = {} must be >= 0",
                self.noise_sigma
            )));
        }
        if self.max_episode_steps == 0 || self.n_beams == 0 {
            return Err(Error::Config(
                "env.max_episode_steps and env.n_beams must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn layout(&self, semantic: bool) -> ObservationLayout {
        ObservationLayout {
            n_beams: self.n_beams,
            goal: self.goal_inputs,
            semantic,
        }
    }

    pub fn range_scale(&self) -> Option<f64> {
        self.scale_ranges.then_some(self.max_range)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    GoalReached,
    WallHit,
    Timeout,
    None,
}

impl Event {
    pub fn is_terminal(self) -> bool {
        !matches!(self, Event::None)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub event: Event,
    /// Zero-based index of this step within the episode.
    pub step_index: usize,
    /// The robot touched something during this step.
    pub contact: bool,
    pub contact_class: Option<ObstacleClass>,
    /// Straight-line displacement of the robot over this step.
    pub displacement: f64,
    pub pose: Pose,
}

pub struct Env {
    cfg: EnvConfig,
    world: WorldState,
    rng: RngStream,
    steps: usize,
    done: bool,
    observation: Observation,
}

impl Env {
    /// Generates the stage from `spec.seed` and returns a ready environment.
    pub fn new(spec: &StageSpec, cfg: EnvConfig) -> Result<Env> {
        let mut rng = stream(spec.seed, Stream::Environment);
        let world = generate_stage(spec, &mut rng)?;
        Env::from_world(world, cfg, rng)
    }

    /// Wraps an existing world, e.g. a hand-built scenario.
    pub fn from_world(world: WorldState, cfg: EnvConfig, rng: RngStream) -> Result<Env> {
        cfg.validate()?;
        let mut env = Env {
            cfg,
            world,
            rng,
            steps: 0,
            done: false,
            observation: Observation {
                ranges: Vec::new(),
                goal: Slot::ABSENT,
                human: Slot::ABSENT,
                robot: Slot::ABSENT,
            },
        };
        env.observation = env.observe()?;
        Ok(env)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn world_mut(&mut self) -> &mut WorldState {
        &mut self.world
    }

    pub fn observation(&self) -> &Observation {
        &self.observation
    }

    pub fn layout(&self) -> ObservationLayout {
        self.cfg.layout(self.world.spec.kind.semantic_inputs())
    }

    pub fn features(&self) -> Vec<f32> {
        self.observation.features(&self.layout(), self.cfg.range_scale())
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Starts a new episode from the arena center.
    pub fn reset(&mut self) -> Result<&Observation> {
        reset_episode(&mut self.world, &mut self.rng)?;
        self.restart()
    }

    /// Starts a new episode without re-randomizing the world.
    pub fn restart(&mut self) -> Result<&Observation> {
        self.steps = 0;
        self.done = false;
        self.observation = self.observe()?;
        Ok(&self.observation)
    }

    /// Current (noisy) observation; consumes noise draws when enabled.
    pub fn observe(&mut self) -> Result<Observation> {
        let scan = raycast_scan(
            &self.world.scene(),
            self.world.robot,
            self.cfg.n_beams,
            self.cfg.max_range,
        )?;
        let scan = apply_noise(&scan, self.cfg.noise_sigma, &mut self.rng);
        Ok(pack_observation(&scan, &self.world))
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        let before = self.world.robot;
        let after = integrate_motion(before, action.velocity(), self.cfg.dt)?;
        self.world.robot = after;
        update_dynamic_obstacles(&mut self.world, self.cfg.dt, &mut self.rng);

        let scene = self.world.scene();
        let collision = check_collision(&scene, after, self.cfg.robot_radius);
        if collision.hit && !self.cfg.terminate_on_collision {
            self.world.robot = before;
        }
        let pose = self.world.robot;
        let goal = self.world.goal;
        let goal_reached = pose.position().distance(goal.position) <= goal.radius;
        let wall_hit = !goal_reached && collision.hit && self.cfg.terminate_on_collision;
        let step_index = self.steps;
        self.steps += 1;

        let event = if goal_reached {
            Event::GoalReached
        } else if wall_hit {
            Event::WallHit
        } else if self.steps >= self.cfg.max_episode_steps {
            Event::Timeout
        } else {
            Event::None
        };

        let observation = self.observe()?;
        let facts = RewardFacts {
            goal_reached,
            wall_hit,
            abs_alpha: observation.goal.angle.abs(),
            d_human: observation.human.distance,
            d_robot: observation.robot.distance,
        };
        let (reward, _) = compute_reward(&facts, &self.cfg)?;
        let done = event.is_terminal();
        self.done = done;
        self.observation = observation.clone();

        Ok(StepResult {
            observation,
            reward,
            done,
            event,
            step_index,
            contact: collision.hit,
            contact_class: collision.class,
            displacement: pose.position().distance(before.position()),
            pose,
        })
    }
}
