//! Binary PPM (P6, maxval 255) frames and the JSON schedule sidecar.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::image::RasterImage;
use super::schedule::{FrameKind, FrameSchedule};
use super::EncoderError;

pub fn encode_ppm(img: &RasterImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

pub fn decode_ppm(bytes: &[u8]) -> Result<RasterImage, EncoderError> {
    let bad = |why: &str| EncoderError::Ppm(why.to_string());
    let mut pos = 0;
    // Header: magic, width, height, maxval, separated by whitespace with
    // optional '#' comments, then exactly one whitespace byte.
    let mut token = || -> Result<String, EncoderError> {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(bad("truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| !b.is_ascii_whitespace()) {
            pos += 1;
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P6" {
        return Err(bad("not a P6 file"));
    }
    let mut num =
        || -> Result<u32, EncoderError> { token()?.parse().map_err(|_| bad("bad header number")) };
    let width = num()?;
    let height = num()?;
    if num()? != 255 {
        return Err(bad("maxval must be 255"));
    }
    pos += 1;
    let len = width as usize * height as usize * 3;
    let body = bytes.get(pos..).ok_or_else(|| bad("missing pixel data"))?;
    if body.len() != len {
        return Err(bad("pixel data length mismatch"));
    }
    Ok(RasterImage {
        width,
        height,
        pixels: body.to_vec(),
    })
}

pub fn write_ppm(img: &RasterImage, path: &Path) -> Result<(), EncoderError> {
    fs::write(path, encode_ppm(img))?;
    Ok(())
}

pub fn read_ppm(path: &Path) -> Result<RasterImage, EncoderError> {
    decode_ppm(&fs::read(path)?)
}

/// Metadata stored next to a frame sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleSidecar {
    pub hold_time_ms: u64,
    pub frame_kinds: Vec<FrameKind>,
    pub k: usize,
    #[serde(rename = "N")]
    pub data_leds: usize,
    /// Number of LEDs the decoder should find, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub led_count: Option<usize>,
}

impl ScheduleSidecar {
    pub fn from_schedule(s: &FrameSchedule, led_count: Option<usize>) -> Self {
        Self {
            hold_time_ms: s.hold_time_ms,
            frame_kinds: s.kinds(),
            k: s.k,
            data_leds: s.data_leds,
            led_count,
        }
    }
}
