use serde::{Deserialize, Serialize};

/// 8-bit RGB triple, serialized as `[r, g, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const BLACK: Rgb = Rgb(0, 0, 0);

    pub fn channels(self) -> [u8; 3] {
        [self.0, self.1, self.2]
    }

    pub fn as_f64(self) -> [f64; 3] {
        [self.0 as f64, self.1 as f64, self.2 as f64]
    }
}

/// Row-major RGB frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl RasterImage {
    pub fn filled(width: u32, height: u32, color: Rgb) -> Self {
        let pixels = color
            .channels()
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * 3)
            .collect();
        Self {
            width,
            height,
            pixels,
        }
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        let o = self.offset(x, y);
        Rgb(self.pixels[o], self.pixels[o + 1], self.pixels[o + 2])
    }

    pub fn set(&mut self, x: u32, y: u32, c: Rgb) {
        let o = self.offset(x, y);
        self.pixels[o..o + 3].copy_from_slice(&c.channels());
    }

    /// Sets the pixel if it lies inside the frame.
    pub fn put(&mut self, x: i64, y: i64, c: Rgb) {
        if x >= 0 && y >= 0 && (x as u32) < self.width && (y as u32) < self.height {
            self.set(x as u32, y as u32, c);
        }
    }

    /// Pixels whose centers lie within `radius` of `(cx, cy)`, clipped to the
    /// frame.
    pub fn disc(&self, cx: f64, cy: f64, radius: f64) -> impl Iterator<Item = (u32, u32)> + '_ {
        let x0 = (cx - radius).floor().max(0.0) as u32;
        let y0 = (cy - radius).floor().max(0.0) as u32;
        let x1 = ((cx + radius).ceil().max(0.0) as u32).min(self.width.saturating_sub(1));
        let y1 = ((cy + radius).ceil().max(0.0) as u32).min(self.height.saturating_sub(1));
        let r2 = radius * radius;
        (y0..=y1).flat_map(move |y| {
            (x0..=x1).filter_map(move |x| {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                (dx * dx + dy * dy <= r2).then_some((x, y))
            })
        })
    }

    /// Mean color over the disc; `None` if the disc misses the frame.
    pub fn mean_in_disc(&self, cx: f64, cy: f64, radius: f64) -> Option<[f64; 3]> {
        let mut sum = [0.0; 3];
        let mut count = 0usize;
        for (x, y) in self.disc(cx, cy, radius) {
            let c = self.get(x, y).as_f64();
            for ch in 0..3 {
                sum[ch] += c[ch];
            }
            count += 1;
        }
        (count > 0).then(|| sum.map(|s| s / count as f64))
    }
}
