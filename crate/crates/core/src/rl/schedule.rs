/// Linear decay from `start` by `1/t_max` per step, floored at `eps_min`:
/// `max(eps_min, start - t / t_max)`.
pub fn epsilon_at(t: u64, t_max: u64, start: f64, eps_min: f64) -> f64 {
    if t_max == 0 {
        return eps_min;
    }
    (start - t as f64 / t_max as f64).max(eps_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn schedule_points() {
        assert_eq!(epsilon_at(0, 100_000, 1.0, 0.05), 1.0);
        assert_eq!(epsilon_at(50_000, 100_000, 1.0, 0.05), 0.5);
        assert_eq!(epsilon_at(100_000, 100_000, 1.0, 0.05), 0.05);
        assert_eq!(epsilon_at(5_000_000, 100_000, 1.0, 0.05), 0.05);
        assert!((epsilon_at(95_000, 100_000, 1.0, 0.05) - 0.05).abs() < 1e-12);
        assert_eq!(epsilon_at(96_000, 100_000, 1.0, 0.05), 0.05);
    }

    proptest! {
        #[test]
        fn non_increasing_and_clamped(t in 0u64..1_000_000, dt in 0u64..10_000) {
            let a = epsilon_at(t, 100_000, 1.0, 0.05);
            let b = epsilon_at(t + dt, 100_000, 1.0, 0.05);
            prop_assert!(b <= a);
            prop_assert!((0.05..=1.0).contains(&a));
        }
    }
}
