//! Wireless messages and their byte layout.
//!
//! ```text
//! +------+----------------+-------+--------+--------------------------+
//! | 0xA5 | session_id u32 | round | fields | (len u16, bytes) x fields |
//! +------+----------------+-------+--------+--------------------------+
//! ```
//!
//! All integers are big-endian. Bit strings are encoded as one byte of bit
//! length followed by the MSB-first packed bits.
//!
//! | round | fields                          |
//! |-------|---------------------------------|
//! | 1     | `pk_A`, `c_A` (32 bytes)        |
//! | 2     | `pk_B`, `R_B` (bit string)      |
//! | 3     | `d_A.nonce` (bit string), `d_A.salt` (16 bytes) |

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::crypto::{Commitment, Decommitment, DIGEST_LEN, SALT_LEN};

use super::ProtocolError;

pub const MESSAGE_TAG: u8 = 0xA5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SessionId(pub u32);

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Round {
    One = 1,
    Two = 2,
    Three = 3,
}

impl Round {
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Round::One),
            2 => Some(Round::Two),
            3 => Some(Round::Three),
            _ => None,
        }
    }

    /// Rounds one and three travel node to sink; round two sink to node.
    pub fn to_sink(self) -> bool {
        self != Round::Two
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Commit { pk_a: Vec<u8>, c_a: Commitment },
    Challenge { pk_b: Vec<u8>, r_b: BitString },
    Reveal { d_a: Decommitment },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WirelessMessage {
    pub session_id: SessionId,
    pub payload: Payload,
}

fn put_field(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u16).to_be_bytes());
    out.extend_from_slice(bytes);
}

fn encode_bits(bits: &BitString) -> Vec<u8> {
    let mut out = vec![bits.len() as u8];
    out.extend(bits.to_bytes());
    out
}

fn decode_bits(field: &[u8]) -> Result<BitString, ProtocolError> {
    let (&len, rest) = field
        .split_first()
        .ok_or_else(|| malformed("empty bit-string field"))?;
    let len = len as usize;
    if rest.len() != len.div_ceil(8) {
        return Err(malformed("bit-string length disagrees with payload"));
    }
    BitString::from_bytes(rest, len).map_err(|e| malformed(&e.to_string()))
}

fn malformed(why: &str) -> ProtocolError {
    ProtocolError::MalformedMessage(why.to_string())
}

impl WirelessMessage {
    pub fn round(&self) -> Round {
        match self.payload {
            Payload::Commit { .. } => Round::One,
            Payload::Challenge { .. } => Round::Two,
            Payload::Reveal { .. } => Round::Three,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = vec![MESSAGE_TAG];
        out.extend_from_slice(&self.session_id.0.to_be_bytes());
        out.push(self.round().number());
        out.push(2);
        match &self.payload {
            Payload::Commit { pk_a, c_a } => {
                put_field(&mut out, pk_a);
                put_field(&mut out, &c_a.digest);
            }
            Payload::Challenge { pk_b, r_b } => {
                put_field(&mut out, pk_b);
                put_field(&mut out, &encode_bits(r_b));
            }
            Payload::Reveal { d_a } => {
                put_field(&mut out, &encode_bits(&d_a.nonce));
                put_field(&mut out, &d_a.salt);
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtocolError> {
        if bytes.len() < 7 || bytes[0] != MESSAGE_TAG {
            return Err(malformed("bad header"));
        }
        let session_id = SessionId(u32::from_be_bytes(bytes[1..5].try_into().unwrap()));
        let round = Round::from_number(bytes[5]).ok_or_else(|| malformed("bad round"))?;
        let count = bytes[6] as usize;
        let mut fields = Vec::with_capacity(count);
        let mut rest = &bytes[7..];
        for _ in 0..count {
            if rest.len() < 2 {
                return Err(malformed("truncated field header"));
            }
            let len = u16::from_be_bytes([rest[0], rest[1]]) as usize;
            if rest.len() < 2 + len {
                return Err(malformed("truncated field"));
            }
            fields.push(&rest[2..2 + len]);
            rest = &rest[2 + len..];
        }
        if !rest.is_empty() {
            return Err(malformed("trailing bytes"));
        }
        if fields.len() != 2 {
            return Err(malformed("wrong field count"));
        }
        let payload = match round {
            Round::One => Payload::Commit {
                pk_a: fields[0].to_vec(),
                c_a: Commitment {
                    digest: <[u8; DIGEST_LEN]>::try_from(fields[1])
                        .map_err(|_| malformed("commitment width"))?,
                },
            },
            Round::Two => Payload::Challenge {
                pk_b: fields[0].to_vec(),
                r_b: decode_bits(fields[1])?,
            },
            Round::Three => Payload::Reveal {
                d_a: Decommitment {
                    nonce: decode_bits(fields[0])?,
                    salt: <[u8; SALT_LEN]>::try_from(fields[1])
                        .map_err(|_| malformed("salt width"))?,
                },
            },
        };
        Ok(Self {
            session_id,
            payload,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_message() -> impl Strategy<Value = WirelessMessage> {
        let bits = (1usize..=32, any::<u32>())
            .prop_map(|(n, v)| BitString::from_u64(v as u64 & ((1u64 << n) - 1), n).unwrap());
        let pk = proptest::collection::vec(any::<u8>(), 0..24);
        let payload = prop_oneof![
            (pk.clone(), any::<[u8; 32]>()).prop_map(|(pk_a, digest)| Payload::Commit {
                pk_a,
                c_a: Commitment { digest }
            }),
            (pk, bits.clone()).prop_map(|(pk_b, r_b)| Payload::Challenge { pk_b, r_b }),
            (bits, any::<[u8; 16]>()).prop_map(|(nonce, salt)| Payload::Reveal {
                d_a: Decommitment { nonce, salt }
            }),
        ];
        (any::<u32>(), payload).prop_map(|(id, payload)| WirelessMessage {
            session_id: SessionId(id),
            payload,
        })
    }

    proptest! {
        #[test]
        fn encode_decode_roundtrip(msg in arb_message()) {
            prop_assert_eq!(WirelessMessage::decode(&msg.encode()).unwrap(), msg);
        }

        #[test]
        fn decode_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..80)) {
            let _ = WirelessMessage::decode(&bytes);
        }
    }

    #[test]
    fn layout_is_stable() {
        let msg = WirelessMessage {
            session_id: SessionId(0x0102_0304),
            payload: Payload::Challenge {
                pk_b: vec![0xaa, 0xbb],
                r_b: BitString::from_u64(0b1011, 4).unwrap(),
            },
        };
        assert_eq!(
            msg.encode(),
            vec![0xA5, 1, 2, 3, 4, 2, 2, 0, 2, 0xaa, 0xbb, 0, 2, 4, 0xb0]
        );
    }

    #[test]
    fn rejects_bad_widths() {
        let mut bytes = WirelessMessage {
            session_id: SessionId(1),
            payload: Payload::Reveal {
                d_a: Decommitment {
                    nonce: BitString::zeros(8),
                    salt: [0; 16],
                },
            },
        }
        .encode();
        bytes.pop();
        assert!(WirelessMessage::decode(&bytes).is_err());
    }
}
