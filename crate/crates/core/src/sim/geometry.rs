use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Point::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFinite("segment endpoint"));
        }
        if a == b {
            return Err(Error::InvalidArgument("degenerate segment".into()));
        }
        Ok(Segment { a, b })
    }

    pub fn closest_point(&self, p: Point) -> Point {
        let ab = self.b - self.a;
        let t = ((p - self.a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
        self.a + ab * t
    }

    pub fn distance_to(&self, p: Point) -> f64 {
        self.closest_point(p).distance(p)
    }

    /// Proper or touching intersection test between two segments.
    pub fn intersects(&self, other: &Segment) -> bool {
        fn orient(a: Point, b: Point, c: Point) -> f64 {
            (b - a).cross(c - a)
        }
        fn on_segment(a: Point, b: Point, p: Point) -> bool {
            p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
        }
        let d1 = orient(other.a, other.b, self.a);
        let d2 = orient(other.a, other.b, self.b);
        let d3 = orient(self.a, self.b, other.a);
        let d4 = orient(self.a, self.b, other.b);
        if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
            return true;
        }
        (d1 == 0.0 && on_segment(other.a, other.b, self.a))
            || (d2 == 0.0 && on_segment(other.a, other.b, self.b))
            || (d3 == 0.0 && on_segment(self.a, self.b, other.a))
            || (d4 == 0.0 && on_segment(self.a, self.b, other.b))
    }
}

/// Semantic class of a world object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleClass {
    Wall,
    StaticObstacle,
    Human,
    Robot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Circle { center: Point, radius: f64 },
    Polygon { vertices: Vec<Point> },
}

impl Shape {
    pub fn circle(center: Point, radius: f64) -> Result<Self> {
        if !center.is_finite() || !radius.is_finite() {
            return Err(Error::NonFinite("circle"));
        }
        if radius <= 0.0 {
            return Err(Error::InvalidArgument(format!("circle radius {radius} must be > 0")));
        }
        Ok(Shape::Circle { center, radius })
    }

    /// Simple polygon with at least three vertices, in either winding.
    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidArgument("polygon needs at least 3 vertices".into()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("polygon vertex"));
        }
        let shape = Shape::Polygon { vertices };
        let edges = shape.edges();
        for (i, e) in edges.iter().enumerate() {
            if e.a == e.b {
                return Err(Error::InvalidArgument("polygon has repeated vertex".into()));
            }
            for (j, f) in edges.iter().enumerate().skip(i + 1) {
                let adjacent = j == i + 1 || (i == 0 && j == edges.len() - 1);
                if !adjacent && e.intersects(f) {
                    return Err(Error::InvalidArgument("polygon is self-intersecting".into()));
                }
            }
        }
        Ok(shape)
    }

    /// Axis-aligned rectangle centered at `center`.
    pub fn rectangle(center: Point, half_w: f64, half_h: f64) -> Result<Self> {
        Shape::polygon(vec![
            Point::new(center.x - half_w, center.y - half_h),
            Point::new(center.x + half_w, center.y - half_h),
            Point::new(center.x + half_w, center.y + half_h),
            Point::new(center.x - half_w, center.y + half_h),
        ])
    }

    pub fn edges(&self) -> Vec<Segment> {
        match self {
            Shape::Circle { .. } => Vec::new(),
            Shape::Polygon { vertices } => (0..vertices.len())
                .map(|i| Segment {
                    a: vertices[i],
                    b: vertices[(i + 1) % vertices.len()],
                })
                .collect(),
        }
    }

    pub fn centroid(&self) -> Point {
        match self {
            Shape::Circle { center, .. } => *center,
            Shape::Polygon { vertices } => {
                let sum = vertices.iter().fold(Point::ORIGIN, |acc, v| acc + *v);
                sum * (1.0 / vertices.len() as f64)
            }
        }
    }

    /// Radius of a disc around [`Shape::centroid`] that covers the shape.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            Shape::Circle { radius, .. } => *radius,
            Shape::Polygon { vertices } => {
                let c = self.centroid();
                vertices.iter().map(|v| v.distance(c)).fold(0.0, f64::max)
            }
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            Shape::Circle { center, radius } => p.distance(*center) <= *radius,
            Shape::Polygon { vertices } => point_in_loop(vertices, p),
        }
    }

    /// Signed distance from `p` to the shape boundary; negative inside.
    pub fn signed_distance(&self, p: Point) -> f64 {
        match self {
            Shape::Circle { center, radius } => p.distance(*center) - radius,
            Shape::Polygon { .. } => {
                let d = self
                    .edges()
                    .iter()
                    .map(|e| e.distance_to(p))
                    .fold(f64::INFINITY, f64::min);
                if self.contains(p) {
                    -d
                } else {
                    d
                }
            }
        }
    }
}

fn point_in_loop(v: &[Point], p: Point) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub shape: Shape,
    pub class: ObstacleClass,
}

/// Static description of a closed world: boundary walls plus solid obstacles.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WorldGeometry {
    pub walls: Vec<Segment>,
    pub obstacles: Vec<Obstacle>,
}

impl WorldGeometry {
    /// Square room of side `size` centered on the origin.
    pub fn square_arena(size: f64) -> Result<Self> {
        if !(size.is_finite() && size > 0.0) {
            return Err(Error::InvalidArgument(format!("arena size {size} must be > 0")));
        }
        let h = size / 2.0;
        let corners = [
            Point::new(-h, -h),
            Point::new(h, -h),
            Point::new(h, h),
            Point::new(-h, h),
        ];
        let walls = (0..4)
            .map(|i| Segment::new(corners[i], corners[(i + 1) % 4]))
            .collect::<Result<Vec<_>>>()?;
        Ok(WorldGeometry {
            walls,
            obstacles: Vec::new(),
        })
    }

    /// Checks the arena is closed: every wall endpoint is shared by an even
    /// number of wall ends.
    pub fn validate(&self) -> Result<()> {
        if self.walls.len() < 3 {
            return Err(Error::InvalidArgument("arena needs at least 3 walls".into()));
        }
        let ends: Vec<Point> = self.walls.iter().flat_map(|w| [w.a, w.b]).collect();
        for p in &ends {
            let degree = ends.iter().filter(|q| *q == p).count();
            if degree % 2 != 0 {
                return Err(Error::InvalidArgument(format!(
                    "arena is not closed at ({:.3}, {:.3})",
                    p.x, p.y
                )));
            }
        }
        Ok(())
    }

    /// Even-odd containment against the wall loop.
    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        for w in &self.walls {
            let (a, b) = (w.a, w.b);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn with_obstacles<'a>(&self, extra: impl IntoIterator<Item = &'a Obstacle>) -> WorldGeometry {
        let mut world = self.clone();
        world.obstacles.extend(extra.into_iter().cloned());
        world
    }
}
