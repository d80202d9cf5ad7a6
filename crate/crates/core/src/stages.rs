//! Randomized training stages and the motion of dynamic obstacles.
//!
//! The arena is a square centered on the origin. The robot always spawns at
//! the center facing +x; a free disc around the spawn point is kept clear of
//! obstacles.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{normalize_angle, Obstacle, ObstacleClass, Point, Pose, Shape, WorldGeometry};

/// Rejection-sampling budget per placed object.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    Static,
    Dynamic,
    Semantic,
}

impl StageKind {
    /// Whether networks trained on this stage see the human/robot slots.
    pub fn semantic_inputs(self) -> bool {
        matches!(self, StageKind::Semantic)
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StageKind::Static => "static",
            StageKind::Dynamic => "dynamic",
            StageKind::Semantic => "semantic",
        })
    }
}

impl FromStr for StageKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(StageKind::Static),
            "dynamic" => Ok(StageKind::Dynamic),
            "semantic" => Ok(StageKind::Semantic),
            other => Err(Error::InvalidStage(format!("unknown stage kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub kind: StageKind,
    /// Side length of the square arena, meters.
    #[serde(default = "defaults::arena_size")]
    pub arena_size: f64,
    #[serde(default)]
    pub n_static: usize,
    /// Robot-class dynamic obstacles.
    #[serde(default)]
    pub n_dynamic: usize,
    /// Human-class dynamic obstacles (semantic stage only).
    #[serde(default)]
    pub n_humans: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::obstacle_speed")]
    pub obstacle_speed: f64,
    /// Per-step probability that a walking human stops.
    #[serde(default = "defaults::human_stop_rate")]
    pub human_stop_rate: f64,
    #[serde(default = "defaults::stop_duration")]
    pub stop_duration: f64,
    #[serde(default = "defaults::dynamic_radius")]
    pub dynamic_radius: f64,
    /// Half-extent range of static obstacles (circle radius or rectangle half side).
    #[serde(default = "defaults::static_size_min")]
    pub static_size_min: f64,
    #[serde(default = "defaults::static_size_max")]
    pub static_size_max: f64,
    #[serde(default = "defaults::goal_radius")]
    pub goal_radius: f64,
    /// Minimum distance from the goal center to any wall or static obstacle.
    #[serde(default = "defaults::goal_clearance")]
    pub goal_clearance: f64,
    /// Minimum distance between a sampled goal and the spawn point.
    #[serde(default = "defaults::goal_min_distance")]
    pub goal_min_distance: f64,
    /// Radius of the obstacle-free disc around the spawn point.
    #[serde(default = "defaults::spawn_clearance")]
    pub spawn_clearance: f64,
}

mod defaults {
    pub fn arena_size() -> f64 {
        4.0
    }
    pub fn obstacle_speed() -> f64 {
        0.1
    }
    pub fn human_stop_rate() -> f64 {
        0.01
    }
    pub fn stop_duration() -> f64 {
        2.0
    }
    pub fn dynamic_radius() -> f64 {
        0.15
    }
    pub fn static_size_min() -> f64 {
        0.1
    }
    pub fn static_size_max() -> f64 {
        0.3
    }
    pub fn goal_radius() -> f64 {
        0.15
    }
    pub fn goal_clearance() -> f64 {
        0.3
    }
    pub fn goal_min_distance() -> f64 {
        0.4
    }
    pub fn spawn_clearance() -> f64 {
        0.3
    }
}

impl StageSpec {
    /// Bare stage of `kind` with no obstacles and default parameters.
    pub fn empty(kind: StageKind, seed: u64) -> Self {
        StageSpec {
            kind,
            arena_size: defaults::arena_size(),
            n_static: 0,
            n_dynamic: 0,
            n_humans: 0,
            seed,
            obstacle_speed: defaults::obstacle_speed(),
            human_stop_rate: defaults::human_stop_rate(),
            stop_duration: defaults::stop_duration(),
            dynamic_radius: defaults::dynamic_radius(),
            static_size_min: defaults::static_size_min(),
            static_size_max: defaults::static_size_max(),
            goal_radius: defaults::goal_radius(),
            goal_clearance: defaults::goal_clearance(),
            goal_min_distance: defaults::goal_min_distance(),
            spawn_clearance: defaults::spawn_clearance(),
        }
    }

    /// Standard layouts: 3 static obstacles, plus 2 robots (dynamic) or one
    /// robot and one human (semantic).
    pub fn preset(kind: StageKind, seed: u64) -> Self {
        let (n_dynamic, n_humans) = match kind {
            StageKind::Static => (0, 0),
            StageKind::Dynamic => (2, 0),
            StageKind::Semantic => (1, 1),
        };
        StageSpec {
            n_static: 3,
            n_dynamic,
            n_humans,
            ..StageSpec::empty(kind, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidStage(msg));
        let positive = [
            ("arena_size", self.arena_size),
            ("stop_duration", self.stop_duration),
            ("dynamic_radius", self.dynamic_radius),
            ("static_size_min", self.static_size_min),
            ("static_size_max", self.static_size_max),
            ("goal_radius", self.goal_radius),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} = {v} must be finite and > 0"));
            }
        }
        let non_negative = [
            ("obstacle_speed", self.obstacle_speed),
            ("goal_clearance", self.goal_clearance),
            ("goal_min_distance", self.goal_min_distance),
            ("spawn_clearance", self.spawn_clearance),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} = {v} must be finite and >= 0"));
            }
        }
        if self.static_size_min > self.static_size_max {
            return bad("static_size_min exceeds static_size_max".into());
        }
        if !(0.0..=1.0).contains(&self.human_stop_rate) {
            return bad(format!("human_stop_rate {} outside [0, 1]", self.human_stop_rate));
        }
        match self.kind {
            StageKind::Static if self.n_dynamic + self.n_humans > 0 => {
                bad("static stage cannot hold dynamic obstacles".into())
            }
            StageKind::Dynamic if self.n_humans > 0 => bad("humans require the semantic stage".into()),
            StageKind::Semantic if self.n_humans == 0 => bad("semantic stage needs at least one human".into()),
            StageKind::Semantic if self.human_stop_rate <= 0.0 => bad("humans need a positive stop rate".into()),
            _ => Ok(()),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: StageSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("stage spec serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicObstacle {
    pub center: Point,
    pub radius: f64,
    pub class: ObstacleClass,
    pub speed: f64,
    pub heading: f64,
    pub stop_rate: f64,
    /// Seconds left standing still.
    pub stop_timer: f64,
}

impl DynamicObstacle {
    pub fn is_stopped(&self) -> bool {
        self.stop_timer > STOP_EPS
    }

    pub fn to_obstacle(&self) -> Obstacle {
        Obstacle {
            shape: Shape::Circle {
                center: self.center,
                radius: self.radius,
            },
            class: self.class,
        }
    }
}

const STOP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalSpec {
    pub position: Point,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub spec: StageSpec,
    /// Walls and static obstacles.
    pub geometry: WorldGeometry,
    pub dynamic: Vec<DynamicObstacle>,
    pub goal: GoalSpec,
    pub robot: Pose,
}

impl WorldState {
    /// Full collision/raycast scene at the current instant.
    pub fn scene(&self) -> WorldGeometry {
        let dynamic: Vec<Obstacle> = self.dynamic.iter().map(DynamicObstacle::to_obstacle).collect();
        self.geometry.with_obstacles(&dynamic)
    }

    pub fn half_extent(&self) -> f64 {
        self.spec.arena_size / 2.0
    }
}

fn uniform_in_box<R: Rng + ?Sized>(rng: &mut R, half: f64) -> Point {
    Point::new(rng.random_range(-half..=half), rng.random_range(-half..=half))
}

fn place_static<R: Rng + ?Sized>(spec: &StageSpec, placed: &[Obstacle], rng: &mut R) -> Result<Obstacle> {
    let h = spec.arena_size / 2.0;
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let size = rng.random_range(spec.static_size_min..=spec.static_size_max);
        let use_circle = rng.random_bool(0.5);
        let reach = if use_circle {
            size
        } else {
            size * std::f64::consts::SQRT_2
        };
        let span = h - reach;
        if span <= 0.0 {
            continue;
        }
        let center = uniform_in_box(rng, span);
        let shape = if use_circle {
            Shape::circle(center, size)?
        } else {
            Shape::rectangle(center, size, size)?
        };
        if shape.signed_distance(Point::ORIGIN) < spec.spawn_clearance {
            continue;
        }
        let overlaps = placed
            .iter()
            .any(|o| o.shape.centroid().distance(center) < o.shape.bounding_radius() + shape.bounding_radius());
        if !overlaps {
            return Ok(Obstacle {
                shape,
                class: ObstacleClass::StaticObstacle,
            });
        }
    }
    Err(Error::PlacementFailed {
        what: "static obstacle",
        attempts: MAX_PLACEMENT_ATTEMPTS,
    })
}

fn place_dynamic<R: Rng + ?Sized>(
    spec: &StageSpec,
    class: ObstacleClass,
    statics: &[Obstacle],
    placed: &[DynamicObstacle],
    rng: &mut R,
) -> Result<DynamicObstacle> {
    let r = spec.dynamic_radius;
    let span = spec.arena_size / 2.0 - r;
    if span > 0.0 {
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let center = uniform_in_box(rng, span);
            let heading = rng.random_range(-PI..PI);
            if center.norm() < spec.spawn_clearance + r {
                continue;
            }
            if statics.iter().any(|o| o.shape.signed_distance(center) < r) {
                continue;
            }
            if placed.iter().any(|d| d.center.distance(center) < d.radius + r) {
                continue;
            }
            let stop_rate = match class {
                ObstacleClass::Human => spec.human_stop_rate,
                _ => 0.0,
            };
            return Ok(DynamicObstacle {
                center,
                radius: r,
                class,
                speed: spec.obstacle_speed,
                heading,
                stop_rate,
                stop_timer: 0.0,
            });
        }
    }
    Err(Error::PlacementFailed {
        what: "dynamic obstacle",
        attempts: MAX_PLACEMENT_ATTEMPTS,
    })
}

fn spawn_dynamic<R: Rng + ?Sized>(spec: &StageSpec, statics: &[Obstacle], rng: &mut R) -> Result<Vec<DynamicObstacle>> {
    let classes = std::iter::repeat_n(ObstacleClass::Robot, spec.n_dynamic)
        .chain(std::iter::repeat_n(ObstacleClass::Human, spec.n_humans));
    let mut dynamic = Vec::with_capacity(spec.n_dynamic + spec.n_humans);
    for class in classes {
        let d = place_dynamic(spec, class, statics, &dynamic, rng)?;
        dynamic.push(d);
    }
    Ok(dynamic)
}

/// Samples a goal clear of walls, static obstacles, current dynamic obstacles
/// and the spawn point.
pub fn sample_goal<R: Rng + ?Sized>(
    spec: &StageSpec,
    geometry: &WorldGeometry,
    dynamic: &[DynamicObstacle],
    rng: &mut R,
) -> Result<GoalSpec> {
    let span = spec.arena_size / 2.0 - spec.goal_clearance.max(spec.goal_radius);
    if span > 0.0 {
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let p = uniform_in_box(rng, span);
            if p.norm() < spec.goal_min_distance {
                continue;
            }
            if geometry
                .obstacles
                .iter()
                .any(|o| o.shape.signed_distance(p) < spec.goal_clearance)
            {
                continue;
            }
            if dynamic
                .iter()
                .any(|d| d.center.distance(p) < d.radius + spec.goal_radius)
            {
                continue;
            }
            return Ok(GoalSpec {
                position: p,
                radius: spec.goal_radius,
            });
        }
    }
    Err(Error::PlacementFailed {
        what: "goal",
        attempts: MAX_PLACEMENT_ATTEMPTS,
    })
}

/// Builds a fresh randomized world for `spec`. Deterministic in the rng state.
pub fn generate_stage<R: Rng + ?Sized>(spec: &StageSpec, rng: &mut R) -> Result<WorldState> {
    spec.validate()?;
    let mut geometry = WorldGeometry::square_arena(spec.arena_size)?;
    for _ in 0..spec.n_static {
        let o = place_static(spec, &geometry.obstacles, rng)?;
        geometry.obstacles.push(o);
    }
    let dynamic = spawn_dynamic(spec, &geometry.obstacles, rng)?;
    let goal = sample_goal(spec, &geometry, &dynamic, rng)?;
    Ok(WorldState {
        spec: spec.clone(),
        geometry,
        dynamic,
        goal,
        robot: Pose::default(),
    })
}

/// Returns the robot to the arena center, re-seeds dynamic obstacles and
/// draws a new goal. Static obstacles are kept.
pub fn reset_episode<R: Rng + ?Sized>(world: &mut WorldState, rng: &mut R) -> Result<()> {
    world.robot = Pose::default();
    world.dynamic = spawn_dynamic(&world.spec, &world.geometry.obstacles, rng)?;
    world.goal = sample_goal(&world.spec, &world.geometry, &world.dynamic, rng)?;
    Ok(())
}

/// Advances dynamic obstacles by `dt`, reflecting off the arena walls. Humans
/// may pause for `stop_duration` seconds; obstacles pass through each other.
pub fn update_dynamic_obstacles<R: Rng + ?Sized>(world: &mut WorldState, dt: f64, rng: &mut R) {
    let half = world.half_extent();
    let stop_duration = world.spec.stop_duration;
    for ob in &mut world.dynamic {
        if ob.is_stopped() {
            ob.stop_timer = (ob.stop_timer - dt).max(0.0);
            continue;
        }
        ob.stop_timer = 0.0;
        if ob.stop_rate > 0.0 && rng.random::<f64>() < ob.stop_rate {
            ob.stop_timer = stop_duration;
            continue;
        }
        let step = ob.speed * dt;
        let mut x = ob.center.x + step * ob.heading.cos();
        let mut y = ob.center.y + step * ob.heading.sin();
        let mut heading = ob.heading;
        let bound = half - ob.radius;
        // a handful of reflections covers any step shorter than the arena
        for _ in 0..8 {
            if x > bound {
                x = 2.0 * bound - x;
                heading = PI - heading;
            } else if x < -bound {
                x = -2.0 * bound - x;
                heading = PI - heading;
            } else if y > bound {
                y = 2.0 * bound - y;
                heading = -heading;
            } else if y < -bound {
                y = -2.0 * bound - y;
                heading = -heading;
            } else {
                break;
            }
        }
        ob.center = Point::new(x.clamp(-bound, bound), y.clamp(-bound, bound));
        ob.heading = normalize_angle(heading);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use proptest::prelude::*;

    fn rng(seed: u64) -> crate::rng::RngStream {
        stream(seed, Stream::Environment)
    }

    fn walker(class: ObstacleClass, center: Point, heading: f64, speed: f64, stop_rate: f64) -> DynamicObstacle {
        DynamicObstacle {
            center,
            radius: 0.15,
            class,
            speed,
            heading,
            stop_rate,
            stop_timer: 0.0,
        }
    }

    fn world_with(spec: StageSpec, dynamic: Vec<DynamicObstacle>) -> WorldState {
        let mut w = generate_stage(&spec, &mut rng(0)).unwrap();
        w.dynamic = dynamic;
        w
    }

    #[test]
    fn empty_static_stage() {
        let w = generate_stage(&StageSpec::empty(StageKind::Static, 1), &mut rng(1)).unwrap();
        assert!(w.geometry.obstacles.is_empty());
        assert!(w.dynamic.is_empty());
        assert_eq!(w.robot, Pose::default());
        assert_eq!(w.geometry.walls.len(), 4);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = StageSpec::preset(StageKind::Semantic, 9);
        let a = generate_stage(&spec, &mut rng(9)).unwrap();
        let b = generate_stage(&spec, &mut rng(9)).unwrap();
        assert_eq!(a, b);
        let c = generate_stage(&spec, &mut rng(10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn semantic_stage_has_one_human() {
        let spec = StageSpec::preset(StageKind::Semantic, 3);
        let w = generate_stage(&spec, &mut rng(3)).unwrap();
        let humans = w.dynamic.iter().filter(|d| d.class == ObstacleClass::Human).count();
        assert_eq!(humans, 1);
        assert!(w
            .dynamic
            .iter()
            .all(|d| (d.class == ObstacleClass::Human) == (d.stop_rate > 0.0)));
    }

    #[test]
    fn stage_validation() {
        let mut s = StageSpec::empty(StageKind::Static, 0);
        s.n_dynamic = 1;
        assert!(s.validate().is_err());
        let s = StageSpec::empty(StageKind::Semantic, 0);
        assert!(s.validate().is_err());
        let mut s = StageSpec::preset(StageKind::Dynamic, 0);
        s.n_humans = 1;
        assert!(s.validate().is_err());
        let mut s = StageSpec::preset(StageKind::Semantic, 0);
        s.human_stop_rate = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn overcrowded_stage_errors() {
        let mut s = StageSpec::empty(StageKind::Static, 0);
        s.n_static = 500;
        assert!(matches!(
            generate_stage(&s, &mut rng(0)),
            Err(Error::PlacementFailed { .. })
        ));
    }

    #[test]
    fn spawn_disc_kept_free() {
        for seed in 0..200 {
            let mut s = StageSpec::preset(StageKind::Semantic, seed);
            s.n_static = 6;
            let w = generate_stage(&s, &mut rng(seed)).unwrap();
            for o in w.scene().obstacles {
                assert!(o.shape.signed_distance(Point::ORIGIN) >= 0.3 - 1e-12, "seed {seed}");
            }
        }
    }

    #[test]
    fn reset_returns_robot_to_center() {
        let spec = StageSpec::preset(StageKind::Dynamic, 4);
        let mut w = generate_stage(&spec, &mut rng(4)).unwrap();
        w.robot = Pose::new(1.2, -0.3, 2.0);
        let mut r1 = rng(77);
        let mut r2 = rng(77);
        let mut w2 = w.clone();
        reset_episode(&mut w, &mut r1).unwrap();
        reset_episode(&mut w2, &mut r2).unwrap();
        assert_eq!(w.robot, Pose::default());
        assert_eq!(w, w2);
    }

    #[test]
    fn goals_never_inside_obstacles() {
        let mut spec = StageSpec::preset(StageKind::Semantic, 5);
        spec.n_static = 5;
        let mut r = rng(5);
        let mut w = generate_stage(&spec, &mut r).unwrap();
        for _ in 0..10_000 {
            reset_episode(&mut w, &mut r).unwrap();
            let g = w.goal.position;
            // brute-force check against every solid, static and dynamic
            for o in &w.scene().obstacles {
                assert!(!o.shape.contains(g));
                assert!(o.shape.signed_distance(g) >= w.goal.radius - 1e-12);
            }
            assert!(w.geometry.contains(g));
        }
    }

    #[test]
    fn stopped_human_waits() {
        let spec = StageSpec::preset(StageKind::Semantic, 0);
        let mut h = walker(ObstacleClass::Human, Point::new(0.5, 0.5), 0.3, 0.1, 0.5);
        h.stop_timer = 2.0;
        let mut w = world_with(spec, vec![h.clone()]);
        update_dynamic_obstacles(&mut w, 0.1, &mut rng(0));
        assert_eq!(w.dynamic[0].center, h.center);
        assert!((w.dynamic[0].stop_timer - 1.9).abs() < 1e-15);
    }

    #[test]
    fn robot_obstacle_advances() {
        let spec = StageSpec::preset(StageKind::Dynamic, 0);
        let mut w = world_with(
            spec,
            vec![walker(ObstacleClass::Robot, Point::new(0.5, 0.5), 0.0, 0.1, 0.0)],
        );
        update_dynamic_obstacles(&mut w, 0.1, &mut rng(0));
        assert!((w.dynamic[0].center.x - 0.51).abs() < 1e-12);
        assert_eq!(w.dynamic[0].center.y, 0.5);
    }

    #[test]
    fn reflects_off_wall() {
        // bound = 2.0 - 0.15 = 1.85; start 0.01 short of it moving at 0.4 m/s for 0.1 s
        let spec = StageSpec::preset(StageKind::Dynamic, 0);
        let heading = 0.25_f64;
        let start = Point::new(1.84, 0.0);
        let mut w = world_with(spec, vec![walker(ObstacleClass::Robot, start, heading, 0.4, 0.0)]);
        update_dynamic_obstacles(&mut w, 0.1, &mut rng(0));
        let o = &w.dynamic[0];
        // specular oracle: unfold the straight path, then mirror across x = bound
        let free_x = start.x + 0.04 * heading.cos();
        let expect_x = 2.0 * 1.85 - free_x;
        let expect_y = 0.04 * heading.sin();
        assert!((o.center.x - expect_x).abs() < 1e-12);
        assert!((o.center.y - expect_y).abs() < 1e-12);
        assert!((o.heading - (PI - heading)).abs() < 1e-12);
    }

    #[test]
    fn stop_frequency_grows_with_rate() {
        let mut fractions = Vec::new();
        for rate in [0.005, 0.02, 0.08] {
            let spec = StageSpec::preset(StageKind::Semantic, 0);
            let mut w = world_with(spec, vec![walker(ObstacleClass::Human, Point::ORIGIN, 0.4, 0.1, rate)]);
            let mut r = rng(11);
            let mut stopped = 0;
            let steps = 20_000;
            for _ in 0..steps {
                let before = w.dynamic[0].center;
                update_dynamic_obstacles(&mut w, 0.1, &mut r);
                if w.dynamic[0].center == before {
                    stopped += 1;
                }
            }
            fractions.push(stopped as f64 / steps as f64);
        }
        assert!(
            fractions[0] < fractions[1] && fractions[1] < fractions[2],
            "{fractions:?}"
        );
    }

    #[test]
    fn stage_toml_roundtrip_and_unknown_keys() {
        let spec = StageSpec::preset(StageKind::Semantic, 42);
        let text = spec.to_toml_string();
        assert_eq!(StageSpec::from_toml_str(&text).unwrap(), spec);
        assert!(StageSpec::from_toml_str("kind = \"static\"\nbogus = 1\n").is_err());
        let minimal = StageSpec::from_toml_str("kind = \"static\"\nn_static = 2\n").unwrap();
        assert_eq!(minimal.arena_size, 4.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn obstacles_stay_inside(seed in 0u64..1000, speed in 0.05..1.5f64) {
            let mut spec = StageSpec::preset(StageKind::Semantic, seed);
            spec.obstacle_speed = speed;
            spec.n_dynamic = 3;
            let mut r = rng(seed);
            let mut w = generate_stage(&spec, &mut r).unwrap();
            for _ in 0..2000 {
                update_dynamic_obstacles(&mut w, 0.1, &mut r);
                for d in &w.dynamic {
                    let bound = w.half_extent() - d.radius;
                    prop_assert!(d.center.x.abs() <= bound && d.center.y.abs() <= bound);
                }
            }
        }
    }
}
