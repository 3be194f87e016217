//! Physical arrangement of the node displays in front of the camera.

use serde::{Deserialize, Serialize};

use super::image::Rgb;
use super::EncoderError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedSpec {
    pub center: (f64, f64),
    pub radius: f64,
    pub on_color: Rgb,
    pub off_color: Rgb,
}

/// One node: a red sync LED followed left to right by its data LEDs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDisplay {
    pub sync_led: LedSpec,
    pub data_leds: Vec<LedSpec>,
}

impl NodeDisplay {
    pub fn leds(&self) -> impl Iterator<Item = &LedSpec> {
        std::iter::once(&self.sync_led).chain(&self.data_leds)
    }

    /// Axis-aligned bounds `(x0, y0, x1, y1)` of every disc.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        self.leds().fold(
            (f64::MAX, f64::MAX, f64::MIN, f64::MIN),
            |(x0, y0, x1, y1), l| {
                (
                    x0.min(l.center.0 - l.radius),
                    y0.min(l.center.1 - l.radius),
                    x1.max(l.center.0 + l.radius),
                    y1.max(l.center.1 + l.radius),
                )
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedLayout {
    pub width: u32,
    pub height: u32,
    pub nodes: Vec<NodeDisplay>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutParams {
    pub width: u32,
    pub height: u32,
    pub radius: f64,
    /// Center-to-center distance between neighbouring LEDs of one display.
    pub intra_spacing: f64,
    /// Center-to-center distance between the closest LEDs of neighbouring
    /// displays, horizontally and vertically.
    pub inter_spacing: f64,
    pub sync_on: Rgb,
    pub data_on: Rgb,
    pub off: Rgb,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            radius: 6.0,
            intra_spacing: 18.0,
            inter_spacing: 36.0,
            sync_on: Rgb(255, 0, 0),
            data_on: Rgb(0, 255, 0),
            off: Rgb(20, 20, 20),
        }
    }
}

impl LayoutParams {
    /// Moving the camera closer or farther scales every distance in the frame.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.radius *= factor;
        self.intra_spacing *= factor;
        self.inter_spacing *= factor;
        self
    }
}

impl LedLayout {
    /// `n` displays of `data_leds` data LEDs each, on a centered grid of
    /// `ceil(sqrt(n))` columns.
    pub fn grid(n: usize, data_leds: usize, p: &LayoutParams) -> Result<Self, EncoderError> {
        if n == 0 || data_leds == 0 {
            return Err(EncoderError::EmptyLayout);
        }
        let cols = (n as f64).sqrt().ceil() as usize;
        let rows = n.div_ceil(cols);
        let display_w = data_leds as f64 * p.intra_spacing;
        let total_w = cols as f64 * display_w + (cols - 1) as f64 * p.inter_spacing;
        let total_h = (rows - 1) as f64 * p.inter_spacing;
        let x0 = ((p.width as f64 - total_w) / 2.0).round();
        let y0 = ((p.height as f64 - total_h) / 2.0).round();
        let led = |x: f64, y: f64, on: Rgb| LedSpec {
            center: (x, y),
            radius: p.radius,
            on_color: on,
            off_color: p.off,
        };
        let nodes = (0..n)
            .map(|i| {
                let (r, c) = (i / cols, i % cols);
                let x = x0 + c as f64 * (display_w + p.inter_spacing);
                let y = y0 + r as f64 * p.inter_spacing;
                NodeDisplay {
                    sync_led: led(x, y, p.sync_on),
                    data_leds: (1..=data_leds)
                        .map(|m| led(x + m as f64 * p.intra_spacing, y, p.data_on))
                        .collect(),
                }
            })
            .collect();
        let layout = Self {
            width: p.width,
            height: p.height,
            nodes,
        };
        layout.check_bounds()?;
        Ok(layout)
    }

    pub fn data_leds(&self) -> Result<usize, EncoderError> {
        let first = self
            .nodes
            .first()
            .ok_or(EncoderError::EmptyLayout)?
            .data_leds
            .len();
        if first == 0 || self.nodes.iter().any(|d| d.data_leds.len() != first) {
            return Err(EncoderError::InconsistentDataLeds);
        }
        Ok(first)
    }

    pub fn led_count(&self) -> usize {
        self.nodes.iter().map(|d| 1 + d.data_leds.len()).sum()
    }

    pub fn check_bounds(&self) -> Result<(), EncoderError> {
        for l in self.nodes.iter().flat_map(|d| d.leds()) {
            let (x, y) = l.center;
            if x - l.radius < 0.0
                || y - l.radius < 0.0
                || x + l.radius > (self.width - 1) as f64
                || y + l.radius > (self.height - 1) as f64
            {
                return Err(EncoderError::OutOfBounds {
                    x,
                    y,
                    radius: l.radius,
                    width: self.width,
                    height: self.height,
                });
            }
        }
        Ok(())
    }

    /// Keeps only the listed displays, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            width: self.width,
            height: self.height,
            nodes: indices.iter().map(|&i| self.nodes[i].clone()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
        ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
    }

    #[test]
    fn sixteen_by_three_grid() {
        let p = LayoutParams::default();
        let l = LedLayout::grid(16, 2, &p).unwrap();
        assert_eq!(l.nodes.len(), 16);
        assert_eq!(l.led_count(), 48);
        assert_eq!(l.data_leds().unwrap(), 2);
        // Spacing rules: intra <= 3r, nearest foreign LED >= 6r.
        for (i, a) in l.nodes.iter().enumerate() {
            let pts: Vec<_> = a.leds().map(|x| x.center).collect();
            for w in pts.windows(2) {
                assert!(dist(w[0], w[1]) <= 3.0 * p.radius + 1e-9);
            }
            for (j, b) in l.nodes.iter().enumerate().filter(|(j, _)| *j != i) {
                for pa in a.leds() {
                    for pb in b.leds() {
                        assert!(
                            dist(pa.center, pb.center) >= 6.0 * p.radius - 1e-9,
                            "{i} {j}"
                        );
                    }
                }
            }
            assert!(a.sync_led.center.0 < a.data_leds[0].center.0);
        }
    }

    #[test]
    fn large_scale_overflows() {
        let p = LayoutParams::default().scaled(4.0);
        assert!(matches!(
            LedLayout::grid(32, 3, &p),
            Err(EncoderError::OutOfBounds { .. })
        ));
        assert!(LedLayout::grid(16, 2, &LayoutParams::default().scaled(2.0)).is_ok());
        assert!(LedLayout::grid(16, 2, &LayoutParams::default().scaled(0.5)).is_ok());
        assert!(LedLayout::grid(32, 3, &LayoutParams::default()).is_ok());
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(
            LedLayout::grid(0, 2, &LayoutParams::default()),
            Err(EncoderError::EmptyLayout)
        ));
    }
}
