//! Reading bits and sync state from calibrated LEDs.

use crate::bits::BitString;
use crate::encoder::RasterImage;
use crate::exec::Execution;

use super::cluster::NodeCluster;
use super::detect::DetectedLed;

fn sq_dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|c| (a[c] - b[c]).powi(2)).sum()
}

/// ON iff the disc average is nearer to the ON reference than the OFF one.
/// A disc that falls off the frame reads as OFF.
pub fn led_is_on(frame: &RasterImage, led: &DetectedLed) -> bool {
    match frame.mean_in_disc(led.center.0, led.center.1, led.sample_radius()) {
        Some(c) => sq_dist(c, led.on_rgb) < sq_dist(c, led.off_rgb),
        None => false,
    }
}

/// Reassembles each cluster's `k` bits from `bit_frames`; data LED `m` of
/// bit frame `j` carries bit `j*N + m`. Missing frames read as zeros.
pub fn extract_bits(
    bit_frames: &[RasterImage],
    clusters: &[NodeCluster],
    k: usize,
    exec: Execution,
) -> Vec<BitString> {
    exec.map_slice(clusters, |c| {
        let n = c.data_leds.len().max(1);
        (0..k)
            .map(|b| {
                bit_frames
                    .get(b / n)
                    .zip(c.data_leds.get(b % n))
                    .is_some_and(|(f, led)| led_is_on(f, led))
            })
            .collect()
    })
}

/// Sync is good iff the sync LED is OFF in every bit frame and the final
/// frame exists with sync ON and every data LED OFF.
pub fn check_sync(
    bit_frames: &[RasterImage],
    final_frame: Option<&RasterImage>,
    clusters: &[NodeCluster],
    exec: Execution,
) -> Vec<bool> {
    exec.map_slice(clusters, |c| {
        let quiet = bit_frames.iter().all(|f| !led_is_on(f, &c.sync_led));
        let terminal = final_frame.is_some_and(|f| {
            led_is_on(f, &c.sync_led) && c.data_leds.iter().all(|d| !led_is_on(f, d))
        });
        quiet && terminal
    })
}
