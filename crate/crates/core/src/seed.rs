//! Deterministic seed derivation. Every random stream in the simulator is a
//! ChaCha8 generator seeded from `(batch seed, label, index)`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn derive_seed(seed: u64, label: &str, index: u64) -> [u8; 32] {
    Sha256::new()
        .chain_update(b"oobsim/seed/v1")
        .chain_update(seed.to_be_bytes())
        .chain_update((label.len() as u32).to_be_bytes())
        .chain_update(label.as_bytes())
        .chain_update(index.to_be_bytes())
        .finalize()
        .into()
}

pub fn rng_for(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_seed(seed, label, index))
}

/// Derived 64-bit seed, for handing to a nested component.
pub fn subseed(seed: u64, label: &str, index: u64) -> u64 {
    u64::from_be_bytes(derive_seed(seed, label, index)[..8].try_into().unwrap())
}
