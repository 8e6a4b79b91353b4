//! One-cell-per-bit vectors and the byte boundary.
//!
//! Bit numbering follows the table convention: bit 1 is the most significant
//! bit of the first octet, bit 64 the least significant bit of the last. All
//! byte/bit conversion in the crate funnels through [`bytes_to_bits`] and
//! [`bits_to_bytes`].
//!
//! Nothing in DES is wider than one block, so the cells live inline and no
//! operation here touches the heap.

use std::fmt;
use std::hash::{Hash, Hasher};

/// Widest vector the cipher needs: one 64-bit block.
pub const MAX_WIDTH: usize = 64;

/// An ordered sequence of bits, one cell per bit, addressed 1-based.
///
/// Cells beyond `width` are always zero.
#[derive(Clone)]
pub struct BitVector {
    bits: [u8; MAX_WIDTH],
    width: usize,
}

impl BitVector {
    pub fn zero(width: usize) -> Self {
        assert!(width <= MAX_WIDTH, "width {width} exceeds {MAX_WIDTH}");
        Self {
            bits: [0; MAX_WIDTH],
            width,
        }
    }

    /// Builds from raw cells; every cell must be 0 or 1.
    pub fn from_bits(bits: Vec<u8>) -> Self {
        Self::from_cells(&bits)
    }

    /// Builds from a cell slice; every cell must be 0 or 1.
    pub fn from_cells(cells: &[u8]) -> Self {
        assert!(cells.iter().all(|&b| b <= 1), "cells must be 0 or 1");
        let mut v = Self::zero(cells.len());
        v.bits[..cells.len()].copy_from_slice(cells);
        v
    }

    /// Parses a hex string into a vector of width `4 * s.len()`.
    pub fn from_hex(s: &str) -> Self {
        let mut v = Self::zero(4 * s.len());
        for (k, c) in s.chars().enumerate() {
            let value = c
                .to_digit(16)
                .unwrap_or_else(|| panic!("non-hex digit {c:?}")) as u8;
            for i in 0..4 {
                v.bits[4 * k + i] = (value >> (3 - i)) & 1;
            }
        }
        v
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// 1-based bit read, matching the permutation-table convention.
    pub fn get(&self, pos: usize) -> u8 {
        assert!(
            pos >= 1 && pos <= self.width,
            "bit {pos} out of 1..={}",
            self.width
        );
        self.bits[pos - 1]
    }

    /// 1-based bit write.
    pub fn set(&mut self, pos: usize, bit: u8) {
        assert!(
            pos >= 1 && pos <= self.width,
            "bit {pos} out of 1..={}",
            self.width
        );
        debug_assert!(bit <= 1);
        self.bits[pos - 1] = bit;
    }

    /// Raw 0-based view of the cells.
    pub fn as_cells(&self) -> &[u8] {
        &self.bits[..self.width]
    }

    pub fn xor(&self, other: &Self) -> Self {
        assert_eq!(self.width, other.width, "xor width mismatch");
        let mut out = Self::zero(self.width);
        for i in 0..self.width {
            out.bits[i] = self.bits[i] ^ other.bits[i];
        }
        out
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.width + other.width);
        out.bits[..self.width].copy_from_slice(self.as_cells());
        out.bits[self.width..self.width + other.width].copy_from_slice(other.as_cells());
        out
    }

    /// The bits `lo..=hi` (1-based, inclusive) as a new vector.
    pub fn slice(&self, lo: usize, hi: usize) -> Self {
        assert!(lo >= 1 && hi <= self.width && lo <= hi);
        Self::from_cells(&self.bits[lo - 1..hi])
    }

    pub fn count_ones(&self) -> usize {
        self.as_cells().iter().filter(|&&b| b == 1).count()
    }

    /// Hex rendering; width must be a multiple of 4.
    pub fn to_hex(&self) -> String {
        assert_eq!(self.width % 4, 0, "hex needs a multiple of 4 bits");
        self.as_cells()
            .chunks(4)
            .map(|n| {
                char::from_digit(u32::from(n[0] << 3 | n[1] << 2 | n[2] << 1 | n[3]), 16).unwrap()
            })
            .map(|c| c.to_ascii_uppercase())
            .collect()
    }
}

impl PartialEq for BitVector {
    fn eq(&self, other: &Self) -> bool {
        self.as_cells() == other.as_cells()
    }
}

impl Eq for BitVector {}

impl Hash for BitVector {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.as_cells().hash(state);
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for &b in self.as_cells() {
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}

/// Unpacks 8 octets into 64 bit cells; bit 1 is the MSB of `block[0]`.
pub fn bytes_to_bits(block: &[u8; 8]) -> BitVector {
    let mut v = BitVector::zero(64);
    for (k, &byte) in block.iter().enumerate() {
        for i in 0..8 {
            v.bits[8 * k + i] = (byte >> (7 - i)) & 1;
        }
    }
    v
}

/// Packs a 64-bit vector back into 8 octets; the exact inverse of
/// [`bytes_to_bits`].
pub fn bits_to_bytes(v: &BitVector) -> [u8; 8] {
    assert_eq!(v.width(), 64, "expected a 64-bit vector, got {}", v.width());
    let mut out = [0u8; 8];
    for (k, chunk) in v.as_cells().chunks(8).enumerate() {
        out[k] = chunk.iter().fold(0, |acc, &b| (acc << 1) | b);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_msb() {
        let v = bytes_to_bits(&[0x80, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(v.get(1), 1);
        assert!((2..=64).all(|i| v.get(i) == 0));
        assert_eq!(bits_to_bytes(&v), [0x80, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn single_lsb() {
        let v = bytes_to_bits(&[0, 0, 0, 0, 0, 0, 0, 0x01]);
        assert_eq!(v.get(64), 1);
        assert!((1..=63).all(|i| v.get(i) == 0));
    }

    #[test]
    fn walkthrough_block_expansion() {
        let v = bytes_to_bits(&[0x01, 0x23, 0x45, 0x67, 0x89, 0xAB, 0xCD, 0xEF]);
        let first: Vec<u8> = (1..=8).map(|i| v.get(i)).collect();
        let last: Vec<u8> = (57..=64).map(|i| v.get(i)).collect();
        assert_eq!(first, [0, 0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(last, [1, 1, 1, 0, 1, 1, 1, 1]);
        assert_eq!(v.to_hex(), "0123456789ABCDEF");
    }

    #[test]
    fn all_zero_packs_to_zero_octets() {
        assert_eq!(bits_to_bytes(&BitVector::zero(64)), [0u8; 8]);
    }

    #[test]
    fn hex_roundtrip() {
        let v = BitVector::from_hex("133457799BBCDFF1");
        assert_eq!(v.width(), 64);
        assert_eq!(v.to_hex(), "133457799BBCDFF1");
        assert_eq!(
            bits_to_bytes(&v),
            [0x13, 0x34, 0x57, 0x79, 0x9B, 0xBC, 0xDF, 0xF1]
        );
    }

    #[test]
    fn slice_and_concat_partition() {
        let v = BitVector::from_hex("F0F0F0F0F0F0F0F0");
        let left = v.slice(1, 32);
        let right = v.slice(33, 64);
        assert_eq!(left.concat(&right), v);
        assert_eq!(left.width(), 32);
    }

    proptest! {
        #[test]
        fn bytes_bits_inverse(block: [u8; 8]) {
            prop_assert_eq!(bits_to_bytes(&bytes_to_bits(&block)), block);
        }

        #[test]
        fn xor_is_involutive(a: [u8; 8], b: [u8; 8]) {
            let va = bytes_to_bits(&a);
            let vb = bytes_to_bits(&b);
            prop_assert_eq!(va.xor(&vb).xor(&vb), va);
        }
    }
}
