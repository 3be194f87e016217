//! Locating LEDs from the All-OFF / All-ON difference.

use serde::{Deserialize, Serialize};

use crate::encoder::RasterImage;

use super::DecoderError;

/// Per-pixel `max(|dR|, |dG|, |dB|)` between two frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaMap {
    pub width: u32,
    pub height: u32,
    pub mu: Vec<u8>,
}

impl DeltaMap {
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.mu[y as usize * self.width as usize + x as usize]
    }
}

pub fn pixel_delta(all_off: &RasterImage, all_on: &RasterImage) -> Result<DeltaMap, DecoderError> {
    if (all_off.width, all_off.height) != (all_on.width, all_on.height) {
        return Err(DecoderError::DimensionMismatch {
            expected: (all_off.width, all_off.height),
            actual: (all_on.width, all_on.height),
        });
    }
    let mu = all_off
        .pixels
        .chunks_exact(3)
        .zip(all_on.pixels.chunks_exact(3))
        .map(|(a, b)| (0..3).map(|c| a[c].abs_diff(b[c])).max().unwrap())
        .collect();
    Ok(DeltaMap {
        width: all_off.width,
        height: all_off.height,
        mu,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectConfig {
    pub start: u8,
    pub step: u8,
    pub floor: u8,
    pub min_run: usize,
    /// Minimum distance between accepted centers, in multiples of the
    /// candidate's estimated radius.
    pub exclusion_factor: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            start: 200,
            step: 16,
            floor: 48,
            min_run: 3,
            exclusion_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LedRole {
    Sync,
    Data,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectedLed {
    pub center: (f64, f64),
    /// Bounding extent of the blob: longest row run and row count.
    pub run_length: usize,
    pub run_width: usize,
    /// Radius of a disc with the blob's area.
    pub radius: f64,
    pub on_rgb: [f64; 3],
    pub off_rgb: [f64; 3],
    pub role: LedRole,
    /// Threshold at which the LED was first accepted.
    pub threshold: u8,
}

impl DetectedLed {
    /// Radius used when averaging colors, kept clear of the disc edge.
    pub fn sample_radius(&self) -> f64 {
        (self.radius * 0.75).max(1.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Run {
    y: u32,
    x0: u32,
    x1: u32,
}

struct Blob {
    runs: Vec<Run>,
}

impl Blob {
    fn area(&self) -> usize {
        self.runs.iter().map(|r| (r.x1 - r.x0 + 1) as usize).sum()
    }

    fn centroid(&self) -> (f64, f64) {
        let (mut sx, mut sy) = (0.0, 0.0);
        for r in &self.runs {
            let len = (r.x1 - r.x0 + 1) as f64;
            sx += (r.x0 + r.x1) as f64 / 2.0 * len;
            sy += r.y as f64 * len;
        }
        let a = self.area() as f64;
        (sx / a, sy / a)
    }

    fn extent(&self) -> (usize, usize) {
        let longest = self
            .runs
            .iter()
            .map(|r| (r.x1 - r.x0 + 1) as usize)
            .max()
            .unwrap_or(0);
        let y0 = self.runs.iter().map(|r| r.y).min().unwrap_or(0);
        let y1 = self.runs.iter().map(|r| r.y).max().unwrap_or(0);
        (longest, (y1 - y0 + 1) as usize)
    }
}

/// Maximal runs of `mu > tau` of at least `min_run` pixels in every row.
fn row_runs(delta: &DeltaMap, tau: u8, min_run: usize) -> Vec<Run> {
    let mut runs = vec![];
    for y in 0..delta.height {
        let mut x = 0;
        while x < delta.width {
            if delta.get(x, y) > tau {
                let x0 = x;
                while x < delta.width && delta.get(x, y) > tau {
                    x += 1;
                }
                if (x - x0) as usize >= min_run {
                    runs.push(Run { y, x0, x1: x - 1 });
                }
            } else {
                x += 1;
            }
        }
    }
    runs
}

/// Groups runs that overlap horizontally on adjacent rows.
fn blobs(runs: &[Run]) -> Vec<Blob> {
    let mut parent: Vec<usize> = (0..runs.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    // Runs are ordered by row, so the previous row's runs form a window.
    let mut prev_start = 0;
    let mut row_start = 0;
    for i in 0..runs.len() {
        if i > 0 && runs[i].y != runs[i - 1].y {
            prev_start = if runs[i].y == runs[i - 1].y + 1 {
                row_start
            } else {
                i
            };
            row_start = i;
        }
        for j in prev_start..row_start {
            if runs[j].x0 <= runs[i].x1 && runs[i].x0 <= runs[j].x1 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<Run>> = Default::default();
    for i in 0..runs.len() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(runs[i]);
    }
    groups.into_values().map(|runs| Blob { runs }).collect()
}

/// Majority of the square window of half-size `r/2` around the center lies
/// above the threshold.
fn centered(delta: &DeltaMap, center: (f64, f64), radius: f64, tau: u8) -> bool {
    let h = (radius / 2.0).floor().max(1.0) as i64;
    let (cx, cy) = (center.0.round() as i64, center.1.round() as i64);
    let (mut hit, mut total) = (0, 0);
    for y in cy - h..=cy + h {
        for x in cx - h..=cx + h {
            total += 1;
            if x >= 0
                && y >= 0
                && (x as u32) < delta.width
                && (y as u32) < delta.height
                && delta.get(x as u32, y as u32) > tau
            {
                hit += 1;
            }
        }
    }
    2 * hit > total
}

/// Sweeps the threshold down from `start` by `step` until `expected` LEDs
/// are found or `floor` is passed. LEDs accepted at a higher threshold are
/// kept; new candidates closer than the exclusion distance to an accepted
/// center are discarded. Returned LEDs are ordered top to bottom, then left to
/// right, with colors and roles still unset.
pub fn detect_leds(
    delta: &DeltaMap,
    expected: usize,
    config: &DetectConfig,
) -> Result<Vec<DetectedLed>, DecoderError> {
    let mut accepted: Vec<DetectedLed> = vec![];
    let mut tau = config.start;
    loop {
        if accepted.len() >= expected {
            break;
        }
        for blob in blobs(&row_runs(delta, tau, config.min_run)) {
            let center = blob.centroid();
            let radius = (blob.area() as f64 / std::f64::consts::PI).sqrt();
            let excl = config.exclusion_factor * radius;
            let crowded = accepted.iter().any(|l| {
                let d = ((l.center.0 - center.0).powi(2) + (l.center.1 - center.1).powi(2)).sqrt();
                d < excl.max(config.exclusion_factor * l.radius)
            });
            if crowded || !centered(delta, center, radius, tau) {
                continue;
            }
            let (run_length, run_width) = blob.extent();
            accepted.push(DetectedLed {
                center,
                run_length,
                run_width,
                radius,
                on_rgb: [0.0; 3],
                off_rgb: [0.0; 3],
                role: LedRole::Data,
                threshold: tau,
            });
        }
        match tau.checked_sub(config.step) {
            Some(next) if next >= config.floor && config.step > 0 => tau = next,
            _ => break,
        }
    }
    if accepted.len() < expected {
        return Err(DecoderError::DetectionIncomplete {
            found: accepted.len(),
            expected,
        });
    }
    accepted.sort_by(|a, b| {
        a.center
            .1
            .total_cmp(&b.center.1)
            .then(a.center.0.total_cmp(&b.center.0))
    });
    Ok(accepted)
}

/// Sync LEDs are red: R exceeds both G and B by this margin.
pub const RED_MARGIN: f64 = 32.0;

/// Records each LED's ON and OFF reference colors and classifies it.
pub fn calibrate(leds: &mut [DetectedLed], all_off: &RasterImage, all_on: &RasterImage) {
    for led in leds {
        let r = led.sample_radius();
        let (x, y) = led.center;
        led.on_rgb = all_on.mean_in_disc(x, y, r).unwrap_or([0.0; 3]);
        led.off_rgb = all_off.mean_in_disc(x, y, r).unwrap_or([0.0; 3]);
        let [red, green, blue] = led.on_rgb;
        led.role = if red > green + RED_MARGIN && red > blue + RED_MARGIN {
            LedRole::Sync
        } else {
            LedRole::Data
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{RasterImage, Rgb};

    fn blank() -> RasterImage {
        RasterImage::filled(200, 150, Rgb(10, 10, 10))
    }

    fn disc(img: &mut RasterImage, cx: f64, cy: f64, r: f64, c: Rgb) {
        let pts: Vec<_> = img.disc(cx, cy, r).collect();
        for (x, y) in pts {
            img.set(x, y, c);
        }
    }

    #[test]
    fn delta_basics() {
        let a = blank();
        let mut b = blank();
        assert!(pixel_delta(&a, &b).unwrap().mu.iter().all(|&m| m == 0));
        b.set(5, 7, Rgb(10, 47, 10));
        let d = pixel_delta(&a, &b).unwrap();
        assert_eq!(d.get(5, 7), 37);
        assert_eq!(d.mu.iter().filter(|&&m| m != 0).count(), 1);
        let small = RasterImage::filled(2, 2, Rgb::BLACK);
        assert!(matches!(
            pixel_delta(&a, &small),
            Err(DecoderError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empty_map_no_leds() {
        let d = pixel_delta(&blank(), &blank()).unwrap();
        assert!(detect_leds(&d, 0, &DetectConfig::default())
            .unwrap()
            .is_empty());
        assert_eq!(
            detect_leds(&d, 1, &DetectConfig::default()).unwrap_err(),
            DecoderError::DetectionIncomplete {
                found: 0,
                expected: 1
            }
        );
    }

    #[test]
    fn single_led_center() {
        let mut off = blank();
        let mut on = blank();
        disc(&mut off, 100.0, 100.0, 6.0, Rgb(20, 20, 20));
        disc(&mut on, 100.0, 100.0, 6.0, Rgb(0, 255, 0));
        let d = pixel_delta(&off, &on).unwrap();
        let mut leds = detect_leds(&d, 1, &DetectConfig::default()).unwrap();
        assert_eq!(leds.len(), 1);
        let (x, y) = leds[0].center;
        assert!((x - 100.0).abs() <= 1.0 && (y - 100.0).abs() <= 1.0);
        assert!((leds[0].radius - 6.0).abs() < 0.5);
        // The single-pixel top and bottom rows are shorter than min_run.
        assert_eq!((leds[0].run_length, leds[0].run_width), (13, 11));
        calibrate(&mut leds, &off, &on);
        assert_eq!(leds[0].role, LedRole::Data);
        assert_eq!(leds[0].on_rgb, [0.0, 255.0, 0.0]);
        assert_eq!(leds[0].off_rgb, [20.0, 20.0, 20.0]);
    }

    #[test]
    fn dim_led_found_lower_in_sweep() {
        let off = blank();
        let mut on = blank();
        disc(&mut on, 40.0, 40.0, 5.0, Rgb(250, 10, 10));
        disc(&mut on, 140.0, 40.0, 5.0, Rgb(10, 110, 10));
        let d = pixel_delta(&off, &on).unwrap();
        let mut leds = detect_leds(&d, 2, &DetectConfig::default()).unwrap();
        assert_eq!(leds.len(), 2);
        assert_eq!(leds[0].threshold, 200);
        assert!(leds[1].threshold < 100);
        calibrate(&mut leds, &off, &on);
        assert_eq!(leds[0].role, LedRole::Sync);
        assert_eq!(leds[1].role, LedRole::Data);
    }

    #[test]
    fn thin_lines_are_not_leds() {
        let off = blank();
        let mut on = blank();
        // Two-pixel-wide streak: runs too short to count.
        for y in 10..140 {
            on.set(50, y, Rgb(255, 255, 255));
            on.set(51, y, Rgb(255, 255, 255));
        }
        let d = pixel_delta(&off, &on).unwrap();
        assert!(detect_leds(&d, 0, &DetectConfig::default())
            .unwrap()
            .is_empty());
        assert!(detect_leds(&d, 1, &DetectConfig::default()).is_err());
    }

    #[test]
    fn accepted_centers_respect_exclusion() {
        let off = blank();
        let mut on = blank();
        for (i, x) in [30.0, 45.0, 60.0, 90.0].into_iter().enumerate() {
            disc(&mut on, x, 60.0 + i as f64, 6.0, Rgb(0, 255, 0));
        }
        let d = pixel_delta(&off, &on).unwrap();
        assert!(detect_leds(&d, 10, &DetectConfig::default()).is_err());
        let leds = detect_leds(&d, 3, &DetectConfig::default()).unwrap();
        for a in &leds {
            for b in &leds {
                if a != b {
                    let dist = ((a.center.0 - b.center.0).powi(2)
                        + (a.center.1 - b.center.1).powi(2))
                    .sqrt();
                    assert!(dist >= 2.0 * a.radius.min(b.radius));
                }
            }
        }
    }
}
