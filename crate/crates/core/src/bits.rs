//! Fixed-length bit strings.
//!
//! Index 0 is the most significant (leftmost) bit everywhere: in SAS values,
//! in the LED frame mapping and in packed byte encodings.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("bit length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("value does not fit in {0} bits")]
    Overflow(usize),
    #[error("malformed bit string `{0}`")]
    Malformed(String),
}

/// An ordered sequence of bits with positional equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    /// Builds a string of `len` bits from the low `len` bits of `value`,
    /// most significant first.
    pub fn from_u64(value: u64, len: usize) -> Result<Self, BitsError> {
        if len > 64 || (len < 64 && value >> len != 0) {
            return Err(BitsError::Overflow(len));
        }
        let bits = (0..len)
            .map(|i| (value >> (len - 1 - i)) & 1 == 1)
            .collect();
        Ok(Self { bits })
    }

    /// Interprets the bits as an unsigned big-endian integer.
    ///
    /// Panics if the string is longer than 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.bits.len() <= 64, "bit string too long for u64");
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    /// Unpacks the first `len` bits of `bytes`, MSB first.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self, BitsError> {
        if len > bytes.len() * 8 {
            return Err(BitsError::Overflow(len));
        }
        let bits = (0..len)
            .map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1 == 1)
            .collect();
        Ok(Self { bits })
    }

    /// Packs MSB first; the final byte is zero padded on the right.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<bool> {
        self.bits.get(index).copied()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn flip(&mut self, index: usize) {
        self.bits[index] = !self.bits[index];
    }

    pub fn flipped(&self, index: usize) -> Self {
        let mut out = self.clone();
        out.flip(index);
        out
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString, BitsError> {
        if self.len() != other.len() {
            return Err(BitsError::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(BitString {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Hex digits of the big-endian value, `ceil(len/4)` digits wide.
    pub fn to_hex(&self) -> String {
        let digits = self.bits.len().div_ceil(4).max(1);
        let pad = digits * 4 - self.bits.len();
        let mut nibbles = vec![false; pad];
        nibbles.extend_from_slice(&self.bits);
        nibbles
            .chunks(4)
            .map(|c| {
                let v = c.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8);
                char::from_digit(v as u32, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self, BitsError> {
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for c in hex.chars() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| BitsError::Malformed(hex.to_string()))?;
            bits.extend((0..4).rev().map(|i| (v >> i) & 1 == 1));
        }
        if bits.len() < len {
            return Err(BitsError::Malformed(hex.to_string()));
        }
        let excess = bits.len() - len;
        if bits[..excess].iter().any(|&b| b) {
            return Err(BitsError::Overflow(len));
        }
        Ok(Self {
            bits: bits[excess..].to_vec(),
        })
    }

    /// `<len>:<hex>` form used in golden files and JSON output.
    pub fn to_tagged(&self) -> String {
        format!("{}:{}", self.len(), self.to_hex())
    }

    pub fn from_tagged(s: &str) -> Result<Self, BitsError> {
        let (len, hex) = s
            .split_once(':')
            .ok_or_else(|| BitsError::Malformed(s.to_string()))?;
        let len: usize = len
            .parse()
            .map_err(|_| BitsError::Malformed(s.to_string()))?;
        Self::from_hex(hex, len)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(")?;
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_tagged())
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self {
            bits: iter.into_iter().collect(),
        }
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_tagged())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        BitString::from_tagged(&s).map_err(serde::de::Error::custom)
    }
}
