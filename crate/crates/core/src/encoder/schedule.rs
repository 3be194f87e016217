//! Frame schedules: All-ON, All-OFF, `ceil(k/N)` bit frames, final sync.

use serde::{Deserialize, Serialize};

use crate::crypto::SasValue;

use super::layout::LedLayout;
use super::EncoderError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    AllOn,
    AllOff,
    BitFrame(usize),
    FinalSync,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeStates {
    pub sync: bool,
    pub data: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameStates {
    pub kind: FrameKind,
    /// One entry per display, in layout order.
    pub nodes: Vec<NodeStates>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSchedule {
    pub frames: Vec<FrameStates>,
    pub hold_time_ms: u64,
    pub k: usize,
    pub data_leds: usize,
}

impl FrameSchedule {
    /// Frame `i` starts at `i * hold_time`.
    pub fn timestamp(&self, i: usize) -> u64 {
        i as u64 * self.hold_time_ms
    }

    pub fn duration_ms(&self) -> u64 {
        self.frames.len() as u64 * self.hold_time_ms
    }

    pub fn kinds(&self) -> Vec<FrameKind> {
        self.frames.iter().map(|f| f.kind).collect()
    }

    pub fn bit_frames(&self) -> usize {
        self.k.div_ceil(self.data_leds)
    }
}

/// `(ceil(k/N) + 3) * hold_time`.
pub fn schedule_duration(k: usize, data_leds: usize, hold_time_ms: u64) -> u64 {
    (k.div_ceil(data_leds) as u64 + 3) * hold_time_ms
}

/// In bit frame `j` data LED `m` of every node shows SAS bit `j*N + m`;
/// positions past `k` in the last bit frame stay off, as do all sync LEDs.
pub fn build_schedule(
    sas_per_node: &[SasValue],
    layout: &LedLayout,
    hold_time_ms: u64,
) -> Result<FrameSchedule, EncoderError> {
    if layout.nodes.is_empty() {
        return Err(EncoderError::EmptyLayout);
    }
    if layout.nodes.len() != sas_per_node.len() {
        return Err(EncoderError::NodeCountMismatch {
            layout: layout.nodes.len(),
            sas: sas_per_node.len(),
        });
    }
    let n_data = layout.data_leds()?;
    let k = sas_per_node[0].k();
    if let Some(bad) = sas_per_node.iter().find(|s| s.k() != k) {
        return Err(EncoderError::LengthMismatch {
            expected: k,
            actual: bad.k(),
        });
    }
    let uniform = |kind, sync, data| FrameStates {
        kind,
        nodes: vec![
            NodeStates {
                sync,
                data: vec![data; n_data],
            };
            sas_per_node.len()
        ],
    };
    let mut frames = vec![
        uniform(FrameKind::AllOn, true, true),
        uniform(FrameKind::AllOff, false, false),
    ];
    for j in 0..k.div_ceil(n_data) {
        frames.push(FrameStates {
            kind: FrameKind::BitFrame(j),
            nodes: sas_per_node
                .iter()
                .map(|s| NodeStates {
                    sync: false,
                    data: (0..n_data)
                        .map(|m| s.bits().get(j * n_data + m).unwrap_or(false))
                        .collect(),
                })
                .collect(),
        });
    }
    frames.push(uniform(FrameKind::FinalSync, true, false));
    Ok(FrameSchedule {
        frames,
        hold_time_ms,
        k,
        data_leds: n_data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::encoder::layout::LayoutParams;
    use proptest::prelude::*;

    fn sas(v: u64, k: usize) -> SasValue {
        SasValue::new(BitString::from_u64(v, k).unwrap()).unwrap()
    }

    #[test]
    fn frame_counts() {
        let p = LayoutParams::default();
        let l2 = LedLayout::grid(1, 2, &p).unwrap();
        let l1 = LedLayout::grid(1, 1, &p).unwrap();
        assert_eq!(
            build_schedule(&[sas(0, 20)], &l2, 250)
                .unwrap()
                .frames
                .len(),
            13
        );
        assert_eq!(
            build_schedule(&[sas(0, 20)], &l1, 250)
                .unwrap()
                .frames
                .len(),
            23
        );
        assert_eq!(schedule_duration(20, 2, 250), 3250);
        assert_eq!(schedule_duration(20, 1, 250), 5750);
        assert_eq!(schedule_duration(20, 2, 0), 0);
    }

    #[test]
    fn padding_in_last_bitframe() {
        // SasValue needs k >= 2; pad case k=5, N=2.
        let l = LedLayout::grid(1, 2, &LayoutParams::default()).unwrap();
        let s = build_schedule(&[sas(0b10111, 5)], &l, 250).unwrap();
        assert_eq!(s.bit_frames(), 3);
        let last = &s.frames[4];
        assert_eq!(last.kind, FrameKind::BitFrame(2));
        assert_eq!(last.nodes[0].data, vec![true, false]);
        assert_eq!(s.frames[2].nodes[0].data, vec![true, false]);
        assert_eq!(s.frames[3].nodes[0].data, vec![true, true]);
    }

    #[test]
    fn mismatched_inputs() {
        let l = LedLayout::grid(2, 2, &LayoutParams::default()).unwrap();
        assert!(matches!(
            build_schedule(&[sas(0, 20), sas(0, 19)], &l, 250),
            Err(EncoderError::LengthMismatch {
                expected: 20,
                actual: 19
            })
        ));
        assert!(matches!(
            build_schedule(&[sas(0, 20)], &l, 250),
            Err(EncoderError::NodeCountMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn structure_and_coverage(k in 8usize..=32, n_data in 1usize..=4, nodes in 1usize..=5, seed in any::<u64>()) {
            let l = LedLayout::grid(nodes, n_data, &LayoutParams::default()).unwrap();
            let values: Vec<SasValue> = (0..nodes)
                .map(|i| sas(seed.rotate_left(i as u32 * 7) & ((1u64 << k) - 1), k))
                .collect();
            let s = build_schedule(&values, &l, 250).unwrap();
            prop_assert_eq!(s.frames.len(), k.div_ceil(n_data) + 3);
            prop_assert_eq!(s.duration_ms(), schedule_duration(k, n_data, 250));
            prop_assert_eq!(s.frames[0].kind, FrameKind::AllOn);
            prop_assert_eq!(s.frames[1].kind, FrameKind::AllOff);
            prop_assert_eq!(s.frames.last().unwrap().kind, FrameKind::FinalSync);
            for f in &s.frames {
                for ns in &f.nodes {
                    match f.kind {
                        FrameKind::AllOn => prop_assert!(ns.sync && ns.data.iter().all(|&b| b)),
                        FrameKind::AllOff => prop_assert!(!ns.sync && ns.data.iter().all(|&b| !b)),
                        FrameKind::BitFrame(_) => prop_assert!(!ns.sync),
                        FrameKind::FinalSync => prop_assert!(ns.sync && ns.data.iter().all(|&b| !b)),
                    }
                }
            }
            // Each SAS bit reappears exactly at (frame 2 + b/N, LED b%N).
            for (i, v) in values.iter().enumerate() {
                let mut seen = vec![];
                for j in 0..s.bit_frames() {
                    for m in 0..n_data {
                        if j * n_data + m < k {
                            seen.push(s.frames[2 + j].nodes[i].data[m]);
                        } else {
                            prop_assert!(!s.frames[2 + j].nodes[i].data[m]);
                        }
                    }
                }
                prop_assert_eq!(&seen[..], v.bits().bits());
            }
        }
    }
}
