//! Golden vectors and exhaustive checks for the crypto primitives.
//!
//! `data/golden_vectors.txt` was produced by an independent reference
//! implementation (hashlib SHA-256 plus schoolbook polynomial arithmetic with
//! explicit long-division reduction) and is frozen here.

use oobsim_core::bits::BitString;
use oobsim_core::crypto::{commit, compute_sas, derive_link_key, keygen, open, uhash, SALT_LEN};

fn unhex(s: &str) -> Vec<u8> {
    if s == "-" {
        return vec![];
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap())
        .collect()
}

fn bits(s: &str) -> BitString {
    BitString::from_tagged(s).unwrap()
}

#[test]
fn golden_vectors() {
    let text = include_str!("data/golden_vectors.txt");
    let mut counts = std::collections::BTreeMap::new();
    for line in text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
    {
        let f: Vec<&str> = line.split_whitespace().collect();
        *counts.entry(f[0]).or_insert(0) += 1;
        match f[0] {
            "keygen" => {
                let seed: [u8; 32] = unhex(f[1]).try_into().unwrap();
                let kp = keygen(&seed);
                assert_eq!(kp.private_key, unhex(f[2]), "{line}");
                assert_eq!(kp.public_key, unhex(f[3]), "{line}");
            }
            "commit" => {
                let pk = unhex(f[1]);
                let salt: [u8; SALT_LEN] = unhex(f[3]).try_into().unwrap();
                let (c, d) = commit(&pk, &bits(f[2]), salt);
                assert_eq!(c.digest.to_vec(), unhex(f[4]), "{line}");
                assert_eq!(open(&pk, &c, &d).unwrap(), bits(f[2]));
            }
            "uhash" => {
                let k: usize = f[1].parse().unwrap();
                let key = bits(f[2]);
                assert_eq!(key.len(), k);
                assert_eq!(uhash(&key, &unhex(f[3])).unwrap(), bits(f[4]), "{line}");
            }
            "sas" => {
                let sas = compute_sas(&bits(f[1]), &bits(f[2]), &unhex(f[3])).unwrap();
                assert_eq!(sas.bits(), &bits(f[4]), "{line}");
            }
            "link" => {
                let key = derive_link_key(&unhex(f[1]), &unhex(f[2])).unwrap();
                assert_eq!(key.to_vec(), unhex(f[3]), "{line}");
            }
            other => panic!("unknown vector kind {other}"),
        }
    }
    assert_eq!(counts.len(), 5, "every vector kind present: {counts:?}");
}

// Independent GF(2^8) arithmetic for the brute-force checks: log/antilog
// tables over the generator 0x03 of the AES field.
struct Gf256 {
    exp: [u8; 512],
    log: [u8; 256],
}

impl Gf256 {
    fn new() -> Self {
        let mut exp = [0u8; 512];
        let mut log = [0u8; 256];
        let mut x: u8 = 1;
        for i in 0..255 {
            exp[i] = x;
            log[x as usize] = i as u8;
            // x *= 3
            let hi = x & 0x80 != 0;
            let mut y = x << 1;
            if hi {
                y ^= 0x1b;
            }
            x ^= y;
        }
        for i in 255..512 {
            exp[i] = exp[i - 255];
        }
        Self { exp, log }
    }

    fn mul(&self, a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    /// sum_{i>=1} m_i x^i with m_1 = msg[0].
    fn eval(&self, x: u8, msg: &[u8]) -> u8 {
        let mut pow = 1u8;
        let mut acc = 0u8;
        for &m in msg {
            pow = self.mul(pow, x);
            acc ^= self.mul(m, pow);
        }
        acc
    }
}

fn key8(x: u8) -> BitString {
    BitString::from_u64(x as u64, 8).unwrap()
}

#[test]
fn k8_matches_table_oracle() {
    let gf = Gf256::new();
    let msgs: [&[u8]; 4] = [b"", b"\x01", b"sink-public-key", &[0xff; 9]];
    for msg in msgs {
        for x in 0..=255u8 {
            let got = uhash(&key8(x), msg).unwrap().to_u64() as u8;
            assert_eq!(got, gf.eval(x, msg));
        }
    }
}

/// At k = 8 a block is one byte, so a t-block message is t bytes. For every
/// pair of distinct one-byte messages, and for every pair of distinct
/// two-byte messages (enumerated through their nonzero XOR difference, the
/// hash being additive in the message), count colliding keys exactly.
#[test]
fn k8_collision_bound_exhaustive() {
    let gf = Gf256::new();

    // t = 1: all 256*255/2 pairs.
    let mut worst1 = 0;
    for a in 0..255u8 {
        for b in (a + 1)..=255u8 {
            let c = (0..=255u8)
                .filter(|&x| gf.eval(x, &[a]) == gf.eval(x, &[b]))
                .count();
            worst1 = worst1.max(c);
        }
    }
    assert!(worst1 <= 1, "t=1 worst collisions {worst1}");

    // t = 2: every nonzero difference.
    let mut worst2 = 0;
    for d in 1..=u16::MAX {
        let diff = d.to_be_bytes();
        let c = (0..=255u8).filter(|&x| gf.eval(x, &diff) == 0).count();
        worst2 = worst2.max(c);
    }
    assert!(worst2 <= 2, "t=2 worst collisions {worst2}");

    // Cross-check the implementation on sampled two-block pairs.
    let mut s = 12345u32;
    for _ in 0..2000 {
        s = s.wrapping_mul(1103515245).wrapping_add(12345);
        let a = [(s >> 8) as u8, (s >> 16) as u8];
        let b = [(s >> 24) as u8, (s >> 4) as u8];
        if a == b {
            continue;
        }
        let c = (0..=255u8)
            .filter(|&x| uhash(&key8(x), &a).unwrap() == uhash(&key8(x), &b).unwrap())
            .count();
        assert!(c <= 2);
    }
}

/// Longer messages: the collision count for any distinct pair of t-block
/// messages stays within t keys out of 256.
#[test]
fn k8_collision_bound_long_messages() {
    let mut s = 0xdead_beefu64;
    let mut next = || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        s
    };
    for t in [4usize, 8, 16] {
        for _ in 0..300 {
            let a: Vec<u8> = (0..t).map(|_| next() as u8).collect();
            let mut b = a.clone();
            let i = next() as usize % t;
            b[i] ^= (next() as u8) | 1;
            let c = (0..=255u8)
                .filter(|&x| uhash(&key8(x), &a).unwrap() == uhash(&key8(x), &b).unwrap())
                .count();
            assert!(c <= t, "t={t} collisions {c}");
        }
    }
}
