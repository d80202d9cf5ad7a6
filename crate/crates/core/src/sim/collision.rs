use serde::{Deserialize, Serialize};

use super::geometry::{ObstacleClass, WorldGeometry};
use super::kinematics::Pose;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub hit: bool,
    /// Class of the most deeply overlapping object when `hit`.
    pub class: Option<ObstacleClass>,
}

impl CollisionReport {
    pub const CLEAR: CollisionReport = CollisionReport {
        hit: false,
        class: None,
    };
}

/// Tests a disc robot of `robot_radius` against every wall and obstacle.
/// Touching counts as a hit.
pub fn check_collision(world: &WorldGeometry, pose: Pose, robot_radius: f64) -> CollisionReport {
    let p = pose.position();
    let walls = world.walls.iter().map(|w| (w.distance_to(p), ObstacleClass::Wall));
    let solids = world.obstacles.iter().map(|o| (o.shape.signed_distance(p), o.class));

    walls
        .chain(solids)
        .map(|(d, class)| (d - robot_radius, class))
        .filter(|(clearance, _)| *clearance <= 0.0)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map_or(CollisionReport::CLEAR, |(_, class)| CollisionReport {
            hit: true,
            class: Some(class),
        })
}
