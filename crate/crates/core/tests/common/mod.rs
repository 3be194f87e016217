//! Seeded fault scenarios shared by the integration and acceptance suites.

#![allow(dead_code)]

use std::collections::BTreeMap;

use oobsim_core::decoder::{FailureCause, Verdict};
use oobsim_core::harness::{run_scenario, FaultSpec, ScenarioConfig};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    SingleBitFlip,
    MultiBitFlip,
    SyncMissing,
    SyncPremature,
    SyncDelayed,
    Combined,
}

pub const CATEGORIES: [Category; 6] = [
    Category::SingleBitFlip,
    Category::MultiBitFlip,
    Category::SyncMissing,
    Category::SyncPremature,
    Category::SyncDelayed,
    Category::Combined,
];

pub struct FaultCase {
    pub config: ScenarioConfig,
    pub expected: BTreeMap<usize, FailureCause>,
}

fn sync_fault(rng: &mut ChaCha8Rng, node: usize, bit_frames: usize) -> FaultSpec {
    match rng.gen_range(0..3) {
        0 => FaultSpec::SyncMissing { node },
        1 => FaultSpec::SyncPremature {
            node,
            frame: rng.gen_range(0..bit_frames),
        },
        _ => FaultSpec::SyncDelayed {
            node,
            frames: rng.gen_range(1..3),
        },
    }
}

fn bit_flip(rng: &mut ChaCha8Rng, node: usize, k: usize, count: usize) -> FaultSpec {
    FaultSpec::SasBitFlip {
        node,
        bits: sample(rng, k, count).into_vec(),
    }
}

/// A batch of 4 to 16 nodes with one to three faulted nodes of `category`.
pub fn fault_case(category: Category, seed: u64) -> FaultCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((category as u64) << 32));
    let n = rng.gen_range(4..=16);
    let config = ScenarioConfig {
        n,
        seed,
        ..ScenarioConfig::default()
    };
    let (k, bit_frames) = (config.k, config.k.div_ceil(config.data_leds));
    let count = rng.gen_range(1..=3);
    let faulted = sample(&mut rng, n, count);
    let mut faults = vec![];
    let mut expected = BTreeMap::new();
    for node in faulted {
        let cause = match category {
            Category::SingleBitFlip => {
                faults.push(bit_flip(&mut rng, node, k, 1));
                FailureCause::SasMismatch
            }
            Category::MultiBitFlip => {
                let count = rng.gen_range(2..=k);
                faults.push(bit_flip(&mut rng, node, k, count));
                FailureCause::SasMismatch
            }
            Category::SyncMissing => {
                faults.push(FaultSpec::SyncMissing { node });
                FailureCause::SyncError
            }
            Category::SyncPremature => {
                faults.push(FaultSpec::SyncPremature {
                    node,
                    frame: rng.gen_range(0..bit_frames),
                });
                FailureCause::SyncError
            }
            Category::SyncDelayed => {
                faults.push(FaultSpec::SyncDelayed {
                    node,
                    frames: rng.gen_range(1..4),
                });
                FailureCause::SyncError
            }
            Category::Combined => {
                let count = rng.gen_range(1..=4);
                faults.push(bit_flip(&mut rng, node, k, count));
                faults.push(sync_fault(&mut rng, node, bit_frames));
                FailureCause::Both
            }
        };
        expected.insert(node, cause);
    }
    FaultCase {
        config: ScenarioConfig { faults, ..config },
        expected,
    }
}

/// Runs a case and checks every faulted node fails with its cause and every
/// other node passes.
pub fn check_fault_case(case: &FaultCase) -> Result<(), String> {
    let out = run_scenario(&case.config).map_err(|e| format!("scenario error: {e}"))?;
    for p in &out.report.per_node {
        let want = match case.expected.get(&p.node) {
            Some(c) => Verdict::Failed(*c),
            None => Verdict::Passed,
        };
        if p.verdict != want {
            return Err(format!(
                "seed {} node {}: got {:?}, want {:?} (faults {:?})",
                case.config.seed, p.node, p.verdict, want, case.config.faults
            ));
        }
    }
    Ok(())
}
