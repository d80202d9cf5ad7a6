use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::sim::{angle_to_goal, LaserScan, ObstacleClass, Point, Pose};
use crate::stages::WorldState;

/// Distance reported for a semantic class with no instance in the world.
pub const ABSENT_DISTANCE: f64 = 10.0;

/// Floor applied to noisy ranges.
pub const MIN_NOISY_RANGE: f64 = 0.01;

/// Relative position of one tracked object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub distance: f64,
    /// Bearing relative to the robot heading, `(-pi, pi]`.
    pub angle: f64,
}

impl Slot {
    pub const ABSENT: Slot = Slot {
        distance: ABSENT_DISTANCE,
        angle: 0.0,
    };

    pub fn relative(pose: Pose, target: Point) -> Slot {
        Slot {
            distance: pose.position().distance(target),
            angle: angle_to_goal(pose, target).unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub ranges: Vec<f64>,
    pub goal: Slot,
    pub human: Slot,
    pub robot: Slot,
}

/// Which parts of an [`Observation`] a network consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationLayout {
    pub n_beams: usize,
    pub goal: bool,
    pub semantic: bool,
}

impl ObservationLayout {
    pub fn input_dim(&self) -> usize {
        self.n_beams + if self.goal { 2 } else { 0 } + if self.semantic { 4 } else { 0 }
    }
}

impl Observation {
    /// Ranges followed by the human and robot slots: `n_beams + 4` values.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = self.ranges.clone();
        v.extend([
            self.human.distance,
            self.human.angle,
            self.robot.distance,
            self.robot.angle,
        ]);
        v
    }

    /// Network input: ranges (optionally divided by `range_scale`), then the
    /// goal slot and the semantic slots when the layout asks for them.
    pub fn features(&self, layout: &ObservationLayout, range_scale: Option<f64>) -> Vec<f32> {
        let mut v = Vec::with_capacity(layout.input_dim());
        let scale = range_scale.unwrap_or(1.0);
        v.extend(self.ranges.iter().map(|r| (r / scale) as f32));
        if layout.goal {
            v.extend([self.goal.distance as f32, self.goal.angle as f32]);
        }
        if layout.semantic {
            v.extend([
                self.human.distance as f32,
                self.human.angle as f32,
                self.robot.distance as f32,
                self.robot.angle as f32,
            ]);
        }
        v
    }

    /// Short stable fingerprint of the full observation, for step logs.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for r in &self.ranges {
            hasher.update(r.to_le_bytes());
        }
        for slot in [self.goal, self.human, self.robot] {
            hasher.update(slot.distance.to_le_bytes());
            hasher.update(slot.angle.to_le_bytes());
        }
        let bytes = hasher.finalize();
        bytes[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Nearest instance of `class` among the world's dynamic obstacles.
pub fn nearest_of_class(world: &WorldState, class: ObstacleClass) -> Slot {
    let pose = world.robot;
    world
        .dynamic
        .iter()
        .filter(|d| d.class == class)
        .map(|d| Slot::relative(pose, d.center))
        .min_by(|a, b| a.distance.total_cmp(&b.distance))
        .unwrap_or(Slot::ABSENT)
}

/// Assembles an observation from an (already noisy) scan and the world.
pub fn pack_observation(scan: &LaserScan, world: &WorldState) -> Observation {
    Observation {
        ranges: scan.ranges.clone(),
        goal: Slot::relative(world.robot, world.goal.position),
        human: nearest_of_class(world, ObstacleClass::Human),
        robot: nearest_of_class(world, ObstacleClass::Robot),
    }
}

/// Adds independent zero-mean Gaussian noise to each range and clamps to
/// `[0.01, max_range]`. `sigma == 0` returns the scan untouched and draws
/// nothing from `rng`.
pub fn apply_noise<R: Rng + ?Sized>(scan: &LaserScan, sigma: f64, rng: &mut R) -> LaserScan {
    if sigma <= 0.0 || !sigma.is_finite() {
        return scan.clone();
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
    let ranges = scan
        .ranges
        .iter()
        .map(|r| (r + normal.sample(rng)).clamp(MIN_NOISY_RANGE, scan.max_range))
        .collect();
    LaserScan {
        ranges,
        max_range: scan.max_range,
    }
}
