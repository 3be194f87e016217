//! Transmission time and LED energy estimates.

use serde::{Deserialize, Serialize};

use crate::encoder::schedule_duration;

/// Battery capacity used as the reference for energy fractions, in joules.
pub const DEFAULT_BATTERY_J: f64 = 30780.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub energy_j: f64,
    pub battery_fraction: f64,
}

impl PowerEstimate {
    pub fn battery_percent(&self) -> f64 {
        self.battery_fraction * 100.0
    }
}

/// `E = led_count * V * I * t`, and its share of `battery_j`.
pub fn power_estimate(
    volts: f64,
    amps: f64,
    seconds: f64,
    led_count: u32,
    battery_j: f64,
) -> PowerEstimate {
    let energy_j = led_count as f64 * volts * amps * seconds;
    PowerEstimate {
        energy_j,
        battery_fraction: energy_j / battery_j,
    }
}

pub fn timing_estimate(k: usize, data_leds: usize, hold_time_ms: u64) -> u64 {
    schedule_duration(k, data_leds, hold_time_ms)
}

/// Rounds to one significant digit.
pub fn one_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powf(x.abs().log10().floor());
    (x / scale).round() * scale
}
