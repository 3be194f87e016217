//! Cryptographic building blocks of the pairing protocol: key pairs, a
//! hash-based commitment scheme, the keyed short hash, SAS computation and
//! link-key derivation.

mod gf;

pub use gf::BinaryField;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bits::{BitString, BitsError};

/// Smallest SAS width a batch may use.
pub const MIN_SAS_BITS: usize = 8;
/// Largest SAS width supported anywhere.
pub const MAX_SAS_BITS: usize = 32;
/// Smallest width the keyed hash accepts. Widths below [`MIN_SAS_BITS`] are
/// only used by exhaustive attack enumeration.
pub const MIN_HASH_BITS: usize = gf::MIN_WIDTH;

pub const SALT_LEN: usize = 16;
pub const DIGEST_LEN: usize = 32;
pub const KEY_LEN: usize = 8;

const COMMIT_TAG: &[u8] = b"oobsim/commit/v1";
const KEYGEN_TAG: &[u8] = b"oobsim/keygen/v1";
const LINK_TAG: &[u8] = b"oobsim/link/v1";

// Toy Diffie-Hellman group: multiplicative group modulo the Mersenne prime
// 2^61 - 1 with primitive root 37.
const GROUP_PRIME: u64 = (1 << 61) - 1;
const GROUP_GENERATOR: u64 = 37;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("commitment does not open to the supplied decommitment")]
    CommitmentMismatch,
    #[error("length mismatch: expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("unsupported hash width {0}")]
    UnsupportedWidth(usize),
    #[error("malformed key")]
    MalformedKey,
    #[error("sealed payload failed authentication")]
    SealBroken,
    #[error(transparent)]
    Bits(#[from] BitsError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KeyPair {
    pub public_key: Vec<u8>,
    pub private_key: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Commitment {
    pub digest: [u8; DIGEST_LEN],
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Decommitment {
    pub nonce: BitString,
    pub salt: [u8; SALT_LEN],
}

/// A short authenticated string of `k` bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SasValue(BitString);

impl SasValue {
    pub fn new(value: BitString) -> Result<Self, CryptoError> {
        if !(MIN_HASH_BITS..=MAX_SAS_BITS).contains(&value.len()) {
            return Err(CryptoError::UnsupportedWidth(value.len()));
        }
        Ok(Self(value))
    }

    pub fn bits(&self) -> &BitString {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn into_bits(self) -> BitString {
        self.0
    }
}

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % GROUP_PRIME as u128) as u64
}

fn powmod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1u64;
    base %= GROUP_PRIME;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base);
        }
        base = mulmod(base, base);
        exp >>= 1;
    }
    acc
}

fn decode_scalar(bytes: &[u8]) -> Result<u64, CryptoError> {
    let arr: [u8; KEY_LEN] = bytes.try_into().map_err(|_| CryptoError::MalformedKey)?;
    Ok(u64::from_be_bytes(arr))
}

fn decode_private(bytes: &[u8]) -> Result<u64, CryptoError> {
    let x = decode_scalar(bytes)?;
    if x == 0 || x >= GROUP_PRIME - 1 {
        return Err(CryptoError::MalformedKey);
    }
    Ok(x)
}

fn decode_public(bytes: &[u8]) -> Result<u64, CryptoError> {
    let y = decode_scalar(bytes)?;
    if y <= 1 || y >= GROUP_PRIME {
        return Err(CryptoError::MalformedKey);
    }
    Ok(y)
}

/// Deterministic key pair from a 32-byte seed.
pub fn keygen(seed: &[u8; 32]) -> KeyPair {
    let h = Sha256::new()
        .chain_update(KEYGEN_TAG)
        .chain_update(seed)
        .finalize();
    let d = u64::from_be_bytes(h[..8].try_into().unwrap());
    let x = d % (GROUP_PRIME - 2) + 1;
    KeyPair {
        public_key: powmod(GROUP_GENERATOR, x).to_be_bytes().to_vec(),
        private_key: x.to_be_bytes().to_vec(),
    }
}

/// Recomputes the public key belonging to `private_key`.
pub fn public_from_private(private_key: &[u8]) -> Result<Vec<u8>, CryptoError> {
    let x = decode_private(private_key)?;
    Ok(powmod(GROUP_GENERATOR, x).to_be_bytes().to_vec())
}

fn commitment_digest(pk: &[u8], r: &BitString, salt: &[u8; SALT_LEN]) -> [u8; DIGEST_LEN] {
    Sha256::new()
        .chain_update(COMMIT_TAG)
        .chain_update((pk.len() as u32).to_be_bytes())
        .chain_update(pk)
        .chain_update((r.len() as u16).to_be_bytes())
        .chain_update(r.to_bytes())
        .chain_update(salt)
        .finalize()
        .into()
}

/// Commits to `r` under public key `pk`.
///
/// The digest is `SHA-256(tag || len(pk) || pk || len(r) || r || salt)` with
/// big-endian length prefixes, so distinct inputs never share an encoding.
pub fn commit(pk: &[u8], r: &BitString, salt: [u8; SALT_LEN]) -> (Commitment, Decommitment) {
    let digest = commitment_digest(pk, r, &salt);
    (
        Commitment { digest },
        Decommitment {
            nonce: r.clone(),
            salt,
        },
    )
}

pub fn open(pk: &[u8], c: &Commitment, d: &Decommitment) -> Result<BitString, CryptoError> {
    if commitment_digest(pk, &d.nonce, &d.salt) == c.digest {
        Ok(d.nonce.clone())
    } else {
        Err(CryptoError::CommitmentMismatch)
    }
}

/// Splits `msg` into `k`-bit blocks (MSB first, last block zero padded).
pub(crate) fn message_blocks(msg: &[u8], k: usize) -> Vec<u64> {
    let total = msg.len() * 8;
    let bits = BitString::from_bytes(msg, total).expect("length within bounds");
    bits.bits()
        .chunks(k)
        .map(|chunk| {
            let v = chunk.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
            v << (k - chunk.len())
        })
        .collect()
}

/// Keyed almost-universal hash: polynomial evaluation over GF(2^k).
///
/// With blocks `m_1..m_t` of `msg`, returns `sum m_i * x^i` where the
/// evaluation point `x` is the key. Two distinct messages of at most `t`
/// blocks collide for at most `t` of the `2^k` keys.
pub fn uhash(key: &BitString, msg: &[u8]) -> Result<BitString, CryptoError> {
    let k = key.len();
    let field = BinaryField::new(k).ok_or(CryptoError::UnsupportedWidth(k))?;
    let x = key.to_u64();
    // Horner from the highest power down, one extra multiply for the x^1 offset.
    let acc = message_blocks(msg, k)
        .iter()
        .rev()
        .fold(0u64, |acc, &m| field.mul(acc ^ m, x));
    Ok(BitString::from_u64(acc, k)?)
}

/// `SAS = r_b XOR H_{r_a}(pk_b)`.
pub fn compute_sas(r_b: &BitString, r_a: &BitString, pk_b: &[u8]) -> Result<SasValue, CryptoError> {
    if r_b.len() != r_a.len() {
        return Err(CryptoError::LengthMismatch {
            expected: r_a.len(),
            actual: r_b.len(),
        });
    }
    let h = uhash(r_a, pk_b)?;
    SasValue::new(r_b.xor(&h)?)
}

/// Batches up to this size share one hard-coded SAS width.
pub const SMALL_BATCH_MAX: u64 = 32;

/// SAS width giving PIN-equivalent security for `n` simultaneous nodes.
/// A single node needs 15 bits. Batches of 2 to 32 nodes use the hard-coded
/// 20 bits sized for 32 nodes; larger ones need `15 + ceil(log2 n)`.
pub fn sas_length(n: u64) -> usize {
    let per_batch = |n: u64| 15 + (64 - (n - 1).leading_zeros()) as usize;
    match n {
        0 | 1 => 15,
        2..=SMALL_BATCH_MAX => per_batch(SMALL_BATCH_MAX),
        _ => per_batch(n),
    }
}

/// Symmetric link key from one side's private key and the other's public key.
pub fn derive_link_key(own_private: &[u8], peer_public: &[u8]) -> Result<[u8; 32], CryptoError> {
    let x = decode_private(own_private)?;
    let peer = decode_public(peer_public)?;
    let own = powmod(GROUP_GENERATOR, x).to_be_bytes();
    let shared = powmod(peer, x).to_be_bytes();
    let (lo, hi) = if own.as_slice() <= peer_public {
        (own.as_slice(), peer_public)
    } else {
        (peer_public, own.as_slice())
    };
    Ok(Sha256::new()
        .chain_update(LINK_TAG)
        .chain_update(shared)
        .chain_update(lo)
        .chain_update(hi)
        .finalize()
        .into())
}

fn keystream_block(key: &[u8; 32], counter: u64) -> [u8; 32] {
    Sha256::new()
        .chain_update(b"oobsim/seal/ks")
        .chain_update(key)
        .chain_update(counter.to_be_bytes())
        .finalize()
        .into()
}

fn seal_tag(key: &[u8; 32], body: &[u8]) -> [u8; 16] {
    let h = Sha256::new()
        .chain_update(b"oobsim/seal/tag")
        .chain_update(key)
        .chain_update(body)
        .finalize();
    h[..16].try_into().unwrap()
}

fn apply_keystream(key: &[u8; 32], data: &mut [u8]) {
    for (i, chunk) in data.chunks_mut(32).enumerate() {
        let ks = keystream_block(key, i as u64);
        chunk.iter_mut().zip(ks).for_each(|(b, k)| *b ^= k);
    }
}

/// Wraps bootstrap keying material under a link key (ciphertext || 16-byte tag).
pub fn seal_bootstrap(link_key: &[u8; 32], material: &[u8]) -> Vec<u8> {
    let mut body = material.to_vec();
    apply_keystream(link_key, &mut body);
    let tag = seal_tag(link_key, &body);
    body.extend_from_slice(&tag);
    body
}

pub fn open_bootstrap(link_key: &[u8; 32], sealed: &[u8]) -> Result<Vec<u8>, CryptoError> {
    if sealed.len() < 16 {
        return Err(CryptoError::SealBroken);
    }
    let (body, tag) = sealed.split_at(sealed.len() - 16);
    if seal_tag(link_key, body) != tag {
        return Err(CryptoError::SealBroken);
    }
    let mut out = body.to_vec();
    apply_keystream(link_key, &mut out);
    Ok(out)
}
