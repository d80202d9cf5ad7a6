use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::geometry::Point;
use crate::error::{Error, Result};

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let wrapped = (theta + PI).rem_euclid(TAU) - PI;
    if wrapped <= -PI {
        wrapped + TAU
    } else {
        wrapped
    }
}

/// Planar robot pose. `theta` is kept normalized by every constructor and
/// operation in this module.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityCommand {
    /// m/s along the heading.
    pub linear: f64,
    /// rad/s, counter-clockwise positive.
    pub angular: f64,
}

/// The seven discrete agent actions and their velocity pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Forward,
    Backwards,
    Stop,
    Left,
    Right,
    StrongLeft,
    StrongRight,
}

impl Action {
    pub const COUNT: usize = 7;

    pub const ALL: [Action; Action::COUNT] = [
        Action::Forward,
        Action::Backwards,
        Action::Stop,
        Action::Left,
        Action::Right,
        Action::StrongLeft,
        Action::StrongRight,
    ];

    pub fn from_index(index: usize) -> Result<Action> {
        Action::ALL
            .get(index)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("action index {index} out of 0..7")))
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn velocity(self) -> VelocityCommand {
        let (linear, angular) = match self {
            Action::Forward => (0.15, 0.0),
            Action::Backwards => (-0.15, 0.0),
            Action::Stop => (0.0, 0.0),
            Action::Left => (0.15, 0.75),
            Action::Right => (0.15, -0.75),
            Action::StrongLeft => (0.15, 1.5),
            Action::StrongRight => (0.15, -1.5),
        };
        VelocityCommand { linear, angular }
    }
}

/// Exact unicycle integration over `dt` seconds under a constant command.
pub fn integrate_motion(pose: Pose, cmd: VelocityCommand, dt: f64) -> Result<Pose> {
    if !pose.is_finite() {
        return Err(Error::NonFinite("pose"));
    }
    if !(cmd.linear.is_finite() && cmd.angular.is_finite()) {
        return Err(Error::NonFinite("velocity command"));
    }
    if !dt.is_finite() {
        return Err(Error::NonFinite("dt"));
    }
    if dt <= 0.0 {
        return Err(Error::InvalidArgument(format!("dt {dt} must be > 0")));
    }

    let VelocityCommand { linear, angular } = cmd;
    if angular.abs() < 1e-9 {
        let d = linear * dt;
        return Ok(Pose::new(
            pose.x + d * pose.theta.cos(),
            pose.y + d * pose.theta.sin(),
            pose.theta + angular * dt,
        ));
    }
    let radius = linear / angular;
    let theta_end = pose.theta + angular * dt;
    Ok(Pose::new(
        pose.x + radius * (theta_end.sin() - pose.theta.sin()),
        pose.y - radius * (theta_end.cos() - pose.theta.cos()),
        theta_end,
    ))
}

/// Signed angle from the robot heading to the bearing of `goal`, in `(-pi, pi]`.
pub fn angle_to_goal(pose: Pose, goal: Point) -> Result<f64> {
    let delta = goal - pose.position();
    if delta.x == 0.0 && delta.y == 0.0 {
        return Err(Error::GoalAtPosition);
    }
    Ok(normalize_angle(delta.y.atan2(delta.x) - pose.theta))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn stop_is_identity() {
        let p = integrate_motion(Pose::default(), Action::Stop.velocity(), 0.1).unwrap();
        assert_eq!(p, Pose::default());
    }

    #[test]
    fn forward_one_second() {
        let p = integrate_motion(Pose::default(), Action::Forward.velocity(), 1.0).unwrap();
        assert!(close(p.x, 0.15, 1e-15) && p.y == 0.0 && p.theta == 0.0);
    }

    #[test]
    fn left_quarter_circle() {
        // radius 0.15 / 0.75 = 0.2 m, quarter turn lands at (r, r)
        let p = integrate_motion(Pose::default(), Action::Left.velocity(), FRAC_PI_2 / 0.75).unwrap();
        assert!(close(p.x, 0.2, 1e-12), "{p:?}");
        assert!(close(p.y, 0.2, 1e-12), "{p:?}");
        assert!(close(p.theta, FRAC_PI_2, 1e-12), "{p:?}");
    }

    #[test]
    fn table_actions() {
        let v: Vec<(f64, f64)> = Action::ALL
            .iter()
            .map(|a| (a.velocity().linear, a.velocity().angular))
            .collect();
        assert_eq!(
            v,
            vec![
                (0.15, 0.0),
                (-0.15, 0.0),
                (0.0, 0.0),
                (0.15, 0.75),
                (0.15, -0.75),
                (0.15, 1.5),
                (0.15, -1.5)
            ]
        );
        assert!(Action::from_index(7).is_err());
        assert_eq!(Action::from_index(5).unwrap(), Action::StrongLeft);
    }

    #[test]
    fn rejects_bad_inputs() {
        let cmd = Action::Forward.velocity();
        assert!(integrate_motion(
            Pose {
                x: f64::NAN,
                y: 0.0,
                theta: 0.0
            },
            cmd,
            0.1
        )
        .is_err());
        assert!(integrate_motion(Pose::default(), cmd, 0.0).is_err());
        assert!(integrate_motion(Pose::default(), cmd, f64::INFINITY).is_err());
    }

    #[test]
    fn angle_examples() {
        assert_eq!(angle_to_goal(Pose::default(), Point::new(1.0, 0.0)).unwrap(), 0.0);
        assert!(close(
            angle_to_goal(Pose::default(), Point::new(0.0, 1.0)).unwrap(),
            FRAC_PI_2,
            1e-15
        ));
        assert_eq!(
            angle_to_goal(Pose::new(0.0, 0.0, PI), Point::new(1.0, 0.0)).unwrap(),
            PI
        );
        assert!(matches!(
            angle_to_goal(Pose::new(1.0, 1.0, 0.0), Point::new(1.0, 1.0)),
            Err(Error::GoalAtPosition)
        ));
    }

    #[test]
    fn normalize_boundaries() {
        assert_eq!(normalize_angle(-PI), PI);
        assert_eq!(normalize_angle(PI), PI);
        assert!(close(normalize_angle(3.0 * PI), PI, 1e-12));
        assert!(close(normalize_angle(-FRAC_PI_2), -FRAC_PI_2, 1e-15));
    }

    proptest! {
        #[test]
        fn forward_then_backwards_is_identity(x in -2.0..2.0f64, y in -2.0..2.0f64, th in -3.1..3.1f64, t in 0.01..20.0f64) {
            let p = Pose::new(x, y, th);
            let q = integrate_motion(p, Action::Forward.velocity(), t).unwrap();
            let r = integrate_motion(q, Action::Backwards.velocity(), t).unwrap();
            prop_assert!(close(r.x, p.x, 1e-9) && close(r.y, p.y, 1e-9) && close(r.theta, p.theta, 1e-9));
        }

        #[test]
        fn headings_stay_normalized(th in -100.0..100.0f64, a in 0usize..7, t in 0.01..30.0f64) {
            let q = integrate_motion(Pose::new(0.0, 0.0, th), Action::ALL[a].velocity(), t).unwrap();
            prop_assert!(q.theta > -PI && q.theta <= PI);
        }

        #[test]
        fn angle_to_goal_in_range(x in -5.0..5.0f64, y in -5.0..5.0f64, th in -10.0..10.0f64, gx in -5.0..5.0f64, gy in -5.0..5.0f64) {
            prop_assume!(x != gx || y != gy);
            let a = angle_to_goal(Pose::new(x, y, th), Point::new(gx, gy)).unwrap();
            prop_assert!(a > -PI && a <= PI);
        }
    }
}
