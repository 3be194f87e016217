//! Arithmetic in GF(2^k) for 2 <= k <= 32.

/// Low coefficients of the reduction polynomial for each field width; the
/// leading `x^k` term is implicit. Each entry is the first irreducible
/// trinomial (or pentanomial when no trinomial exists) in lexicographic order.
const REDUCTION: [u64; 33] = [
    0, 0, 0x3, 0x3, 0x3, 0x5, 0x3, 0x3, 0x1b, 0x3, 0x9, 0x5, 0x9, 0x1b, 0x21, 0x3, 0x2b, 0x9, 0x9,
    0x27, 0x9, 0x5, 0x3, 0x21, 0x1b, 0x9, 0x1b, 0x27, 0x3, 0x5, 0x3, 0x9, 0x8d,
];

pub const MIN_WIDTH: usize = 2;
pub const MAX_WIDTH: usize = 32;

/// The binary field of `2^width` elements, elements packed in a `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryField {
    width: usize,
    reduction: u64,
}

impl BinaryField {
    pub fn new(width: usize) -> Option<Self> {
        (MIN_WIDTH..=MAX_WIDTH).contains(&width).then(|| Self {
            width,
            reduction: REDUCTION[width],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Full modulus including the leading term.
    pub fn modulus(&self) -> u64 {
        (1u64 << self.width) | self.reduction
    }

    fn mask(&self) -> u64 {
        (1u64 << self.width) - 1
    }

    pub fn mul(&self, mut a: u64, mut b: u64) -> u64 {
        let top = 1u64 << (self.width - 1);
        let mut acc = 0u64;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            let carry = a & top != 0;
            a = (a << 1) & self.mask();
            if carry {
                a ^= self.reduction;
            }
        }
        acc
    }
}
