use serde::{Deserialize, Serialize};

use super::EnvConfig;
use crate::error::{Error, Result};

pub const GOAL_REWARD: f64 = 100.0;
pub const COLLISION_PENALTY: f64 = -100.0;
pub const TOWARD_GOAL_REWARD: f64 = 0.1;
pub const AWAY_FROM_GOAL_PENALTY: f64 = -0.2;
pub const PROXIMITY_PENALTY: f64 = -10.0;

/// Everything the reward needs to know about the state reached by a step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardFacts {
    pub goal_reached: bool,
    pub wall_hit: bool,
    /// Absolute heading error to the goal, radians.
    pub abs_alpha: f64,
    pub d_human: f64,
    pub d_robot: f64,
}

/// Terminal events override everything; otherwise the heading term and both
/// proximity penalties add up.
pub fn compute_reward(facts: &RewardFacts, cfg: &EnvConfig) -> Result<(f64, bool)> {
    match (facts.goal_reached, facts.wall_hit) {
        (true, true) => return Err(Error::InvalidRewardFacts("goal reached and wall hit together")),
        (true, false) => return Ok((GOAL_REWARD, true)),
        (false, true) => return Ok((COLLISION_PENALTY, true)),
        (false, false) => {}
    }
    if facts.abs_alpha.is_nan() || facts.abs_alpha < 0.0 {
        return Err(Error::InvalidRewardFacts("abs_alpha must be a non-negative angle"));
    }
    if !(facts.d_human >= 0.0 && facts.d_robot >= 0.0) {
        return Err(Error::InvalidRewardFacts("distances must be non-negative"));
    }

    let mut reward = if facts.abs_alpha <= cfg.heading_threshold {
        TOWARD_GOAL_REWARD
    } else {
        AWAY_FROM_GOAL_PENALTY
    };
    if facts.d_human < cfg.human_min_dist {
        reward += PROXIMITY_PENALTY;
    }
    if facts.d_robot < cfg.robot_min_dist {
        reward += PROXIMITY_PENALTY;
    }
    Ok((reward, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn facts(abs_alpha_deg: f64, d_human: f64, d_robot: f64) -> RewardFacts {
        RewardFacts {
            goal_reached: false,
            wall_hit: false,
            abs_alpha: abs_alpha_deg.to_radians(),
            d_human,
            d_robot,
        }
    }

    #[test]
    fn terminal_rows() {
        let cfg = EnvConfig::default();
        let goal = RewardFacts {
            goal_reached: true,
            ..facts(90.0, 0.1, 0.1)
        };
        assert_eq!(compute_reward(&goal, &cfg).unwrap(), (100.0, true));
        let wall = RewardFacts {
            wall_hit: true,
            ..facts(0.0, 10.0, 10.0)
        };
        assert_eq!(compute_reward(&wall, &cfg).unwrap(), (-100.0, true));
        let both = RewardFacts {
            goal_reached: true,
            wall_hit: true,
            ..facts(0.0, 10.0, 10.0)
        };
        assert!(compute_reward(&both, &cfg).is_err());
    }

    #[test]
    fn step_rows() {
        let cfg = EnvConfig::default();
        assert_eq!(compute_reward(&facts(0.0, 10.0, 10.0), &cfg).unwrap(), (0.1, false));
        assert_eq!(
            compute_reward(&facts(45.0, 0.5, 5.0), &cfg).unwrap(),
            (-0.2 - 10.0, false)
        );
        assert_eq!(
            compute_reward(&facts(10.0, 10.0, 0.1), &cfg).unwrap(),
            (0.1 - 10.0, false)
        );
        assert_eq!(
            compute_reward(&facts(31.0, 0.69, 0.19), &cfg).unwrap(),
            (-0.2 - 10.0 - 10.0, false)
        );
        // thresholds are strict for distances, inclusive for the heading cone
        let at_limits = RewardFacts {
            abs_alpha: cfg.heading_threshold,
            ..facts(0.0, 0.7, 0.2)
        };
        assert_eq!(compute_reward(&at_limits, &cfg).unwrap(), (0.1, false));
    }

    #[test]
    fn rejects_nan_facts() {
        let cfg = EnvConfig::default();
        assert!(compute_reward(&facts(f64::NAN, 1.0, 1.0), &cfg).is_err());
        assert!(compute_reward(&facts(0.0, -1.0, 1.0), &cfg).is_err());
    }
}
