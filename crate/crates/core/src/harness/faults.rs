//! Fault injection on the LED channel: node misbehaviour and camera
//! conditions. Faults never forge frame content on behalf of an adversary.

use serde::{Deserialize, Serialize};

use crate::encoder::{FrameKind, FrameSchedule, NoiseModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FaultSpec {
    /// The node shows the listed SAS bits inverted.
    SasBitFlip { node: usize, bits: Vec<usize> },
    /// The sync LED stays dark in the final frame.
    SyncMissing { node: usize },
    /// The sync LED lights during bit frame `frame`.
    SyncPremature { node: usize, frame: usize },
    /// The sync LED lights `frames` frames after the final frame began, after
    /// the camera's last capture.
    SyncDelayed { node: usize, frames: usize },
    /// Camera moved closer (> 1) or farther (< 1); scales all geometry.
    DistanceScale { factor: f64 },
    /// Scene shifted by `(dx, dy)` pixels in frames `from..to`.
    Displacement {
        dx: f64,
        dy: f64,
        from: usize,
        to: usize,
    },
    /// The camera stops delivering frames at `frame`.
    CaptureLost { frame: usize },
}

impl FaultSpec {
    pub fn node(&self) -> Option<usize> {
        match self {
            FaultSpec::SasBitFlip { node, .. }
            | FaultSpec::SyncMissing { node }
            | FaultSpec::SyncPremature { node, .. }
            | FaultSpec::SyncDelayed { node, .. } => Some(*node),
            _ => None,
        }
    }
}

fn bit_frame_index(schedule: &FrameSchedule, j: usize) -> Option<usize> {
    schedule
        .frames
        .iter()
        .position(|f| f.kind == FrameKind::BitFrame(j))
}

/// Applies node faults to `schedule`. `slot` maps a node index to its display
/// position in the schedule, or `None` if the node is not displaying.
pub fn apply_node_faults(
    schedule: &mut FrameSchedule,
    faults: &[FaultSpec],
    slot: impl Fn(usize) -> Option<usize>,
) {
    let n_data = schedule.data_leds;
    let last = schedule.frames.len() - 1;
    for f in faults {
        let Some(pos) = f.node().and_then(&slot) else {
            continue;
        };
        match f {
            FaultSpec::SasBitFlip { bits, .. } => {
                for &b in bits.iter().filter(|&&b| b < schedule.k) {
                    if let Some(fi) = bit_frame_index(schedule, b / n_data) {
                        let led = &mut schedule.frames[fi].nodes[pos].data[b % n_data];
                        *led = !*led;
                    }
                }
            }
            FaultSpec::SyncMissing { .. } => schedule.frames[last].nodes[pos].sync = false,
            FaultSpec::SyncPremature { frame, .. } => {
                if let Some(fi) = bit_frame_index(schedule, *frame) {
                    schedule.frames[fi].nodes[pos].sync = true;
                }
            }
            FaultSpec::SyncDelayed { frames, .. } if *frames > 0 => {
                schedule.frames[last].nodes[pos].sync = false;
            }
            _ => {}
        }
    }
}

/// Product of every distance factor.
pub fn distance_scale(faults: &[FaultSpec]) -> f64 {
    faults
        .iter()
        .filter_map(|f| match f {
            FaultSpec::DistanceScale { factor } => Some(*factor),
            _ => None,
        })
        .product()
}

/// Adds displacement faults to the noise model for a schedule of
/// `frame_count` frames.
pub fn apply_camera_faults(noise: &mut NoiseModel, faults: &[FaultSpec], frame_count: usize) {
    for f in faults {
        if let FaultSpec::Displacement { dx, dy, from, to } = *f {
            if noise.displacement.len() < frame_count {
                noise.displacement.resize(frame_count, (0.0, 0.0));
            }
            for d in noise
                .displacement
                .iter_mut()
                .take(to.min(frame_count))
                .skip(from)
            {
                d.0 += dx;
                d.1 += dy;
            }
        }
    }
}

pub fn capture_lost(faults: &[FaultSpec]) -> Option<usize> {
    faults
        .iter()
        .filter_map(|f| match f {
            FaultSpec::CaptureLost { frame } => Some(*frame),
            _ => None,
        })
        .min()
}
