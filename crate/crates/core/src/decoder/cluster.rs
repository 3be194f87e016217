//! Grouping detected LEDs into node displays.

use serde::{Deserialize, Serialize};

use super::detect::{DetectedLed, LedRole};
use super::DecoderError;

/// Default link distance as a multiple of the median detected radius. Sits
/// between the intra-display pitch (3r) and inter-display spacing (6r) of
/// the default layout.
pub const PROXIMITY_FACTOR: f64 = 4.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeCluster {
    pub sync_led: DetectedLed,
    /// Left to right, then top to bottom.
    pub data_leds: Vec<DetectedLed>,
}

fn dist(a: &DetectedLed, b: &DetectedLed) -> f64 {
    ((a.center.0 - b.center.0).powi(2) + (a.center.1 - b.center.1).powi(2)).sqrt()
}

pub fn default_proximity(leds: &[DetectedLed]) -> f64 {
    let mut radii: Vec<f64> = leds.iter().map(|l| l.radius).collect();
    if radii.is_empty() {
        return 0.0;
    }
    radii.sort_by(f64::total_cmp);
    PROXIMITY_FACTOR * radii[radii.len() / 2]
}

/// Single-linkage clustering: LEDs closer than `proximity` share a cluster.
/// Every cluster must contain exactly one sync LED and, when given,
/// `expected_data` data LEDs. Clusters come back in reading order of their
/// sync LEDs.
pub fn cluster_nodes(
    leds: &[DetectedLed],
    proximity: f64,
    expected_data: Option<usize>,
) -> Result<Vec<NodeCluster>, DecoderError> {
    let n = leds.len();
    let mut label: Vec<usize> = (0..n).collect();
    // Flood labels until stable; n is at most a few hundred.
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            for j in (i + 1)..n {
                if dist(&leds[i], &leds[j]) < proximity && label[i] != label[j] {
                    let m = label[i].min(label[j]);
                    label[i] = m;
                    label[j] = m;
                    changed = true;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<&DetectedLed>> = Default::default();
    for (i, l) in leds.iter().enumerate() {
        groups.entry(label[i]).or_default().push(l);
    }

    let mut clusters = vec![];
    for members in groups.into_values() {
        let (sync, mut data): (Vec<&DetectedLed>, Vec<&DetectedLed>) =
            members.iter().partition(|l| l.role == LedRole::Sync);
        let at = members[0].center;
        if sync.len() != 1 {
            return Err(DecoderError::ClusterInvalid {
                at,
                sync_leds: sync.len(),
                data_leds: data.len(),
            });
        }
        if expected_data.is_some_and(|e| e != data.len()) {
            return Err(DecoderError::ClusterInvalid {
                at,
                sync_leds: 1,
                data_leds: data.len(),
            });
        }
        data.sort_by(|a, b| {
            a.center
                .0
                .total_cmp(&b.center.0)
                .then(a.center.1.total_cmp(&b.center.1))
        });
        clusters.push(NodeCluster {
            sync_led: sync[0].clone(),
            data_leds: data.into_iter().cloned().collect(),
        });
    }

    // Reading order: rows of sync LEDs whose heights differ by less than the
    // proximity, each row left to right.
    clusters.sort_by(|a, b| a.sync_led.center.1.total_cmp(&b.sync_led.center.1));
    let mut ordered: Vec<NodeCluster> = Vec::with_capacity(clusters.len());
    let mut row: Vec<NodeCluster> = vec![];
    for c in clusters {
        if row
            .first()
            .is_some_and(|r| c.sync_led.center.1 - r.sync_led.center.1 >= proximity)
        {
            row.sort_by(|a, b| a.sync_led.center.0.total_cmp(&b.sync_led.center.0));
            ordered.append(&mut row);
        }
        row.push(c);
    }
    row.sort_by(|a, b| a.sync_led.center.0.total_cmp(&b.sync_led.center.0));
    ordered.append(&mut row);
    Ok(ordered)
}
