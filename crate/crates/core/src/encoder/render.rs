//! Synthetic camera frames.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::seed::{rng_for, subseed};

use super::image::{RasterImage, Rgb};
use super::layout::LedLayout;
use super::schedule::{FrameSchedule, FrameStates};
use super::EncoderError;

/// A static bright patch, e.g. glare on the table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reflection {
    pub center: (f64, f64),
    pub radius: f64,
    pub color: Rgb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Per-channel Gaussian standard deviation.
    pub sigma: f64,
    pub ambient: Rgb,
    pub reflections: Vec<Reflection>,
    /// Whole-scene shift `(dx, dy)` in pixels, indexed by frame; frames past
    /// the end are not shifted.
    pub displacement: Vec<(f64, f64)>,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma: 0.0,
            ambient: Rgb(10, 10, 10),
            reflections: vec![],
            displacement: vec![],
        }
    }
}

impl NoiseModel {
    pub fn with_sigma(sigma: f64) -> Self {
        Self {
            sigma,
            ..Self::default()
        }
    }

    fn shift(&self, frame: usize) -> (f64, f64) {
        self.displacement.get(frame).copied().unwrap_or((0.0, 0.0))
    }
}

fn draw(img: &mut RasterImage, cx: f64, cy: f64, radius: f64, color: Rgb) {
    let pts: Vec<_> = img.disc(cx, cy, radius).collect();
    for (x, y) in pts {
        img.set(x, y, color);
    }
}

/// Draws one frame. The scene is shifted by `noise.displacement[frame]`;
/// LEDs pushed off-frame are clipped, so only the unshifted layout must be in
/// bounds.
pub fn render_frame(
    layout: &LedLayout,
    states: &FrameStates,
    noise: &NoiseModel,
    frame: usize,
    seed: u64,
) -> Result<RasterImage, EncoderError> {
    layout.check_bounds()?;
    let mut img = RasterImage::filled(layout.width, layout.height, noise.ambient);
    let (dx, dy) = noise.shift(frame);
    for r in &noise.reflections {
        draw(
            &mut img,
            r.center.0 + dx,
            r.center.1 + dy,
            r.radius,
            r.color,
        );
    }
    for (display, st) in layout.nodes.iter().zip(&states.nodes) {
        let leds = std::iter::once((&display.sync_led, st.sync))
            .chain(display.data_leds.iter().zip(st.data.iter().copied()));
        for (led, on) in leds {
            let color = if on { led.on_color } else { led.off_color };
            draw(
                &mut img,
                led.center.0 + dx,
                led.center.1 + dy,
                led.radius,
                color,
            );
        }
    }
    if noise.sigma > 0.0 {
        let normal = Normal::new(0.0, noise.sigma).expect("finite sigma");
        let mut rng = rng_for(seed, "pixel-noise", frame as u64);
        for p in img.pixels.iter_mut() {
            let v = *p as f64 + normal.sample(&mut rng);
            *p = v.round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(img)
}

/// One image per scheduled frame; frame `i` draws its noise from
/// `(seed, i)` so frames can be rendered in any order.
pub fn render_schedule(
    layout: &LedLayout,
    schedule: &FrameSchedule,
    noise: &NoiseModel,
    seed: u64,
    exec: Execution,
) -> Result<Vec<RasterImage>, EncoderError> {
    let frame_seed = subseed(seed, "render", 0);
    exec.map_indexed(schedule.frames.len(), |i| {
        render_frame(layout, &schedule.frames[i], noise, i, frame_seed)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::crypto::SasValue;
    use crate::encoder::layout::LayoutParams;
    use crate::encoder::schedule::build_schedule;

    fn setup() -> (LedLayout, FrameSchedule) {
        let l = LedLayout::grid(4, 2, &LayoutParams::default()).unwrap();
        let sas: Vec<_> = (0..4)
            .map(|i| SasValue::new(BitString::from_u64(0x5a5a5 ^ i, 20).unwrap()).unwrap())
            .collect();
        let s = build_schedule(&sas, &l, 250).unwrap();
        (l, s)
    }

    #[test]
    fn all_off_and_all_on_colors() {
        let (l, s) = setup();
        let noise = NoiseModel::default();
        let on = render_frame(&l, &s.frames[0], &noise, 0, 1).unwrap();
        let off = render_frame(&l, &s.frames[1], &noise, 1, 1).unwrap();
        for d in &l.nodes {
            for led in d.leds() {
                let (x, y) = led.center;
                assert_eq!(
                    on.mean_in_disc(x, y, led.radius),
                    Some(led.on_color.as_f64())
                );
                assert_eq!(
                    off.mean_in_disc(x, y, led.radius),
                    Some(led.off_color.as_f64())
                );
            }
        }
        let distinct: std::collections::BTreeSet<_> =
            off.pixels.chunks(3).map(|c| (c[0], c[1], c[2])).collect();
        assert_eq!(
            distinct.into_iter().collect::<Vec<_>>(),
            vec![(10, 10, 10), (20, 20, 20)]
        );
    }

    #[test]
    fn noisy_render_is_reproducible() {
        let (l, s) = setup();
        let noise = NoiseModel::with_sigma(8.0);
        let a = render_schedule(&l, &s, &noise, 42, Execution::Sequential).unwrap();
        let b = render_schedule(&l, &s, &noise, 42, Execution::Parallel).unwrap();
        assert_eq!(a.len(), 13);
        assert_eq!(a, b);
        assert_ne!(a[2], a[3]);
        let c = render_schedule(&l, &s, &noise, 43, Execution::Sequential).unwrap();
        assert_ne!(a[0], c[0]);
    }

    #[test]
    fn displacement_moves_scene() {
        let (l, s) = setup();
        let noise = NoiseModel {
            displacement: vec![(0.0, 0.0), (5.0, -3.0)],
            ..NoiseModel::default()
        };
        let a = render_frame(&l, &s.frames[0], &noise, 0, 0).unwrap();
        let b = render_frame(&l, &s.frames[0], &noise, 1, 0).unwrap();
        let (x, y) = l.nodes[0].sync_led.center;
        assert_eq!(a.get(x as u32, y as u32), Rgb(255, 0, 0));
        assert_eq!(b.get(x as u32 + 5, y as u32 - 3), Rgb(255, 0, 0));
    }

    #[test]
    fn out_of_bounds_layout() {
        let (mut l, s) = setup();
        l.nodes[0].sync_led.center = (2.0, 2.0);
        assert!(matches!(
            render_frame(&l, &s.frames[0], &NoiseModel::default(), 0, 0),
            Err(EncoderError::OutOfBounds { .. })
        ));
    }
}
