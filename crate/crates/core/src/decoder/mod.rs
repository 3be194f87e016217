//! Sink-side decoding of the LED channel: capture timing, LED detection,
//! clustering into displays, bit extraction and sync validation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::encoder::RasterImage;
use crate::exec::Execution;

pub mod capture;
pub mod cluster;
pub mod detect;
pub mod extract;

pub use capture::{capture_plan, CapturePlan};
pub use cluster::{cluster_nodes, default_proximity, NodeCluster};
pub use detect::{
    calibrate, detect_leds, pixel_delta, DeltaMap, DetectConfig, DetectedLed, LedRole,
};
pub use extract::{check_sync, extract_bits};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecoderError {
    #[error("frame size {actual:?} differs from {expected:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        actual: (u32, u32),
    },
    #[error("found {found} of {expected} LEDs")]
    DetectionIncomplete { found: usize, expected: usize },
    #[error("cluster near ({:.0}, {:.0}) has {sync_leds} sync and {data_leds} data LEDs", at.0, at.1)]
    ClusterInvalid {
        at: (f64, f64),
        sync_leds: usize,
        data_leds: usize,
    },
    #[error("need the All-ON and All-OFF frames, got {0} frames")]
    MissingCalibration(usize),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecodeConfig {
    pub detect: DetectConfig,
    /// Clustering link distance; derived from the detected LED size if unset.
    pub proximity: Option<f64>,
    #[serde(skip)]
    pub exec: Execution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureCause {
    SasMismatch,
    SyncError,
    Both,
    /// The node's display was never decoded.
    NotDetected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict", content = "cause")]
pub enum Verdict {
    Passed,
    Failed(FailureCause),
}

impl Verdict {
    /// Passed iff the SAS matched a free value and the sync pattern was right.
    pub fn from_checks(sas_matched: bool, sync_ok: bool) -> Self {
        match (sas_matched, sync_ok) {
            (true, true) => Verdict::Passed,
            (false, true) => Verdict::Failed(FailureCause::SasMismatch),
            (true, false) => Verdict::Failed(FailureCause::SyncError),
            (false, false) => Verdict::Failed(FailureCause::Both),
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Passed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDecode {
    pub sync_center: (f64, f64),
    pub sas: BitString,
    pub sync_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    pub clusters: Vec<NodeCluster>,
    pub entries: Vec<ClusterDecode>,
}

/// Decodes a captured frame sequence laid out as All-ON, All-OFF,
/// `ceil(k/N)` bit frames and the final sync frame. Extra trailing frames
/// are ignored; if the sequence ends early, missing bits read as zero and no
/// cluster passes the sync check.
pub fn decode_session(
    frames: &[RasterImage],
    expected_led_count: usize,
    k: usize,
    data_leds: usize,
    config: &DecodeConfig,
) -> Result<DecodeOutput, DecoderError> {
    if frames.len() < 2 {
        return Err(DecoderError::MissingCalibration(frames.len()));
    }
    let (all_on, all_off) = (&frames[0], &frames[1]);
    for f in &frames[1..] {
        if (f.width, f.height) != (all_on.width, all_on.height) {
            return Err(DecoderError::DimensionMismatch {
                expected: (all_on.width, all_on.height),
                actual: (f.width, f.height),
            });
        }
    }
    let delta = pixel_delta(all_off, all_on)?;
    let mut leds = detect_leds(&delta, expected_led_count, &config.detect)?;
    calibrate(&mut leds, all_off, all_on);
    let proximity = config.proximity.unwrap_or_else(|| default_proximity(&leds));
    let clusters = cluster_nodes(&leds, proximity, Some(data_leds))?;

    let bit_count = k.div_ceil(data_leds.max(1));
    let end = frames.len().min(2 + bit_count);
    let bit_frames = &frames[2..end];
    let final_frame = frames.get(2 + bit_count);
    let sas = extract_bits(bit_frames, &clusters, k, config.exec);
    let sync = check_sync(bit_frames, final_frame, &clusters, config.exec);
    let entries = clusters
        .iter()
        .zip(sas.into_iter().zip(sync))
        .map(|(c, (sas, sync_ok))| ClusterDecode {
            sync_center: c.sync_led.center,
            sas,
            sync_ok,
        })
        .collect();
    Ok(DecodeOutput { clusters, entries })
}
