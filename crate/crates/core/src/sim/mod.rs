//! Geometry, lidar raycasting, differential-drive kinematics and collision
//! queries over a closed 2D world.
//!
//! All functions here are pure. The world frame is metric, counter-clockwise
//! positive, and angles are kept in `(-pi, pi]`.

mod collision;
mod geometry;
mod kinematics;
mod lidar;

pub use collision::{check_collision, CollisionReport};
pub use geometry::{Obstacle, ObstacleClass, Point, Segment, Shape, WorldGeometry};
pub use kinematics::{angle_to_goal, integrate_motion, normalize_angle, Action, Pose, VelocityCommand};
pub use lidar::{ray_distance, raycast_scan, LaserScan};

/// Default scan range of the simulated lidar in meters.
pub const DEFAULT_MAX_RANGE: f64 = 3.5;
/// Default robot footprint radius in meters.
pub const DEFAULT_ROBOT_RADIUS: f64 = 0.11;
/// Default number of lidar beams (one per degree).
pub const DEFAULT_BEAMS: usize = 360;
