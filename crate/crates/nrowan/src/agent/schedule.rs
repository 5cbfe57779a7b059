//! Schedules for the weighting factor k that blends the noise-reduction
//! gradient into the TD update.

/// How k evolves during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum KSchedule {
    /// Online adjustment from the running episode reward (the default).
    Reward,
    /// Saturating growth with the frame count.
    Frame,
    /// k stays 0; the update is exactly the noisy baseline's.
    None,
}

/// Frame-based growth `k_final · (1 − e^(−frames/a))`.
pub fn k_frame(frames: usize, k_final: f64, growth_factor: f64) -> f64 {
    k_final - k_final * (-(frames as f64) / growth_factor).exp()
}

/// Reward-based online adjustment
/// `k_final · (r⁺ − inf R)/(sup R − inf R)`, clamped to [0, k_final].
pub fn k_reward(r_plus: f64, reward_floor: f64, reward_ceiling: f64, k_final: f64) -> f64 {
    let raw = k_final * (r_plus - reward_floor) / (reward_ceiling - reward_floor);
    raw.clamp(0.0, k_final)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_schedule_starts_at_zero() {
        assert_eq!(k_frame(0, 4.0, 5000.0), 0.0);
    }

    #[test]
    fn frame_schedule_saturates_at_k_final() {
        assert!((k_frame(10_000_000, 4.0, 5000.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn frame_schedule_at_one_time_constant() {
        let expected = 4.0 * (1.0 - (-1.0f64).exp());
        assert!((k_frame(5000, 4.0, 5000.0) - expected).abs() < 1e-12);
        assert!((k_frame(5000, 4.0, 5000.0) - 2.5285).abs() < 1e-4);
    }

    #[test]
    fn reward_schedule_anchors() {
        assert_eq!(k_reward(0.0, 0.0, 200.0, 4.0), 0.0);
        assert_eq!(k_reward(200.0, 0.0, 200.0, 4.0), 4.0);
        assert_eq!(k_reward(100.0, 0.0, 200.0, 4.0), 2.0);
    }

    #[test]
    fn reward_schedule_clamps_outside_the_anchors() {
        assert_eq!(k_reward(-50.0, 0.0, 200.0, 4.0), 0.0);
        assert_eq!(k_reward(500.0, 0.0, 200.0, 4.0), 4.0);
    }
}
