use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::geometry::{Point, Segment, Shape, WorldGeometry};
use super::kinematics::Pose;
use crate::error::{Error, Result};

/// Hits closer than this to the ray origin are ignored.
const MIN_HIT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserScan {
    pub ranges: Vec<f64>,
    pub max_range: f64,
}

impl LaserScan {
    pub fn n_beams(&self) -> usize {
        self.ranges.len()
    }
}

fn ray_segment(origin: Point, dir: Point, seg: &Segment) -> Option<f64> {
    let edge = seg.b - seg.a;
    let denom = dir.cross(edge);
    if denom.abs() < 1e-12 {
        return None;
    }
    let to_a = seg.a - origin;
    let t = to_a.cross(edge) / denom;
    let u = to_a.cross(dir) / denom;
    (t > MIN_HIT && (0.0..=1.0).contains(&u)).then_some(t)
}

fn ray_circle(origin: Point, dir: Point, center: Point, radius: f64) -> Option<f64> {
    let oc = origin - center;
    let b = dir.dot(oc);
    let c = oc.dot(oc) - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    [-b - root, -b + root].into_iter().find(|t| *t > MIN_HIT)
}

fn ray_shape(origin: Point, dir: Point, shape: &Shape) -> Option<f64> {
    match shape {
        Shape::Circle { center, radius } => ray_circle(origin, dir, *center, *radius),
        Shape::Polygon { .. } => shape
            .edges()
            .iter()
            .filter_map(|e| ray_segment(origin, dir, e))
            .min_by(f64::total_cmp),
    }
}

/// Distance along a unit ray to the first wall or obstacle, if any.
pub fn ray_distance(world: &WorldGeometry, origin: Point, angle: f64) -> Option<f64> {
    let dir = Point::new(angle.cos(), angle.sin());
    let walls = world.walls.iter().filter_map(|w| ray_segment(origin, dir, w));
    let solids = world.obstacles.iter().filter_map(|o| ray_shape(origin, dir, &o.shape));
    walls.chain(solids).min_by(f64::total_cmp)
}

/// Ideal lidar scan. Beam `k` points at `theta + 2*pi*k/n_beams`; beam 0 is
/// the heading and beams sweep counter-clockwise.
pub fn raycast_scan(world: &WorldGeometry, pose: Pose, n_beams: usize, max_range: f64) -> Result<LaserScan> {
    if n_beams == 0 {
        return Err(Error::InvalidArgument("n_beams must be >= 1".into()));
    }
    if !(max_range.is_finite() && max_range > 0.0) {
        return Err(Error::InvalidArgument(format!("max_range {max_range} must be > 0")));
    }
    if !pose.is_finite() {
        return Err(Error::NonFinite("pose"));
    }
    let origin = pose.position();
    if !world.contains(origin) {
        return Err(Error::OutsideArena { x: pose.x, y: pose.y });
    }
    let ranges = (0..n_beams)
        .map(|k| {
            let angle = pose.theta + TAU * k as f64 / n_beams as f64;
            ray_distance(world, origin, angle).map_or(max_range, |d| d.min(max_range))
        })
        .collect();
    Ok(LaserScan { ranges, max_range })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::SQRT_2;

    use super::*;
    use crate::sim::{Obstacle, ObstacleClass};

    #[test]
    fn square_room_axis_and_diagonal() {
        let w = WorldGeometry::square_arena(4.0).unwrap();
        let scan = raycast_scan(&w, Pose::default(), 360, 10.0).unwrap();
        assert!((scan.ranges[0] - 2.0).abs() < 1e-12);
        assert!((scan.ranges[45] - 2.0 * SQRT_2).abs() < 1e-12);
        assert!((scan.ranges[90] - 2.0).abs() < 1e-12);
        assert_eq!(scan.n_beams(), 360);
    }

    #[test]
    fn clamps_to_max_range() {
        let w = WorldGeometry::square_arena(10.0).unwrap();
        let scan = raycast_scan(&w, Pose::default(), 8, 3.5).unwrap();
        assert!(scan.ranges.iter().all(|r| *r == 3.5));
    }

    #[test]
    fn outside_pose_rejected() {
        let w = WorldGeometry::square_arena(4.0).unwrap();
        assert!(matches!(
            raycast_scan(&w, Pose::new(3.0, 0.0, 0.0), 4, 3.5),
            Err(Error::OutsideArena { .. })
        ));
        assert!(raycast_scan(&w, Pose::default(), 0, 3.5).is_err());
    }

    #[test]
    fn circle_and_polygon_hits() {
        let mut w = WorldGeometry::square_arena(4.0).unwrap();
        w.obstacles.push(Obstacle {
            shape: Shape::circle(Point::new(1.0, 0.0), 0.25).unwrap(),
            class: ObstacleClass::Human,
        });
        w.obstacles.push(Obstacle {
            shape: Shape::rectangle(Point::new(0.0, 1.0), 0.5, 0.1).unwrap(),
            class: ObstacleClass::StaticObstacle,
        });
        let scan = raycast_scan(&w, Pose::default(), 4, 3.5).unwrap();
        assert!((scan.ranges[0] - 0.75).abs() < 1e-12);
        assert!((scan.ranges[1] - 0.9).abs() < 1e-12);
        assert!((scan.ranges[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_world_gives_mirrored_scan() {
        let mut w = WorldGeometry::square_arena(4.0).unwrap();
        for y in [-0.8, 0.8] {
            w.obstacles.push(Obstacle {
                shape: Shape::circle(Point::new(0.7, y), 0.2).unwrap(),
                class: ObstacleClass::StaticObstacle,
            });
        }
        let n = 360;
        let scan = raycast_scan(&w, Pose::default(), n, 3.5).unwrap();
        for k in 1..n {
            assert!((scan.ranges[k] - scan.ranges[n - k]).abs() < 1e-9, "beam {k}");
        }
    }
}
