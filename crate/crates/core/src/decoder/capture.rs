use serde::{Deserialize, Serialize};

/// When the sink grabs each frame relative to "Start Transmission".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapturePlan {
    pub st_time: u64,
    pub initial_wait: u64,
    pub hold_time: u64,
    pub timestamps: Vec<u64>,
}

/// First capture after `0.6 * hold_time`, then one per hold time, so every
/// capture lands inside a stable frame.
pub fn capture_plan(st_time: u64, hold_time: u64, frame_count: usize) -> CapturePlan {
    let initial_wait = hold_time * 3 / 5;
    CapturePlan {
        st_time,
        initial_wait,
        hold_time,
        timestamps: (0..frame_count as u64)
            .map(|i| st_time + initial_wait + i * hold_time)
            .collect(),
    }
}

impl CapturePlan {
    /// Index of the schedule frame being shown at time `t`, if transmission
    /// has started.
    pub fn frame_at(&self, t: u64) -> Option<usize> {
        if self.hold_time == 0 {
            return None;
        }
        t.checked_sub(self.st_time)
            .map(|d| (d / self.hold_time) as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_plan() {
        let p = capture_plan(0, 250, 13);
        assert_eq!(p.timestamps[0], 150);
        assert_eq!(p.timestamps[12], 3150);
        assert_eq!(capture_plan(1000, 250, 1).timestamps, vec![1150]);
    }

    proptest! {
        #[test]
        fn spacing_and_frame_alignment(st in 0u64..1_000_000, hold in 1u64..2000, count in 1usize..40) {
            let p = capture_plan(st, hold * 5, count);
            prop_assert_eq!(p.timestamps.len(), count);
            prop_assert_eq!(p.timestamps[0] - st, 3 * hold);
            for (i, w) in p.timestamps.windows(2).enumerate() {
                prop_assert_eq!(w[1] - w[0], hold * 5);
                prop_assert_eq!(p.frame_at(w[0]), Some(i));
            }
        }
    }
}
