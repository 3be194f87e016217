//! LED displays, frame schedules and synthetic camera frames.

use std::io;

use thiserror::Error;

pub mod image;
pub mod layout;
pub mod ppm;
pub mod render;
pub mod schedule;

pub use image::{RasterImage, Rgb};
pub use layout::{LayoutParams, LedLayout, LedSpec, NodeDisplay};
pub use ppm::{decode_ppm, encode_ppm, read_ppm, write_ppm, ScheduleSidecar};
pub use render::{render_frame, render_schedule, NoiseModel, Reflection};
pub use schedule::{
    build_schedule, schedule_duration, FrameKind, FrameSchedule, FrameStates, NodeStates,
};

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("SAS length mismatch: expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("layout has no nodes")]
    EmptyLayout,
    #[error("layout has {layout} displays but {sas} SAS values were given")]
    NodeCountMismatch { layout: usize, sas: usize },
    #[error("displays disagree on data-LED count")]
    InconsistentDataLeds,
    #[error("LED at ({x:.1}, {y:.1}) r={radius:.1} outside {width}x{height} frame")]
    OutOfBounds {
        x: f64,
        y: f64,
        radius: f64,
        width: u32,
        height: u32,
    },
    #[error("malformed PPM: {0}")]
    Ppm(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}
