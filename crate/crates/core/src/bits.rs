//! Control-bit strings carried in messages.

use serde::{Deserialize, Serialize};

/// An append-only bit string with fixed-width big-endian integer fields.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlBits {
    bits: Vec<bool>,
}

impl ControlBits {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push_bit(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// Appends `value` as `width` bits, most significant first.
    ///
    /// Panics if `value` does not fit; callers size the width from the
    /// configuration so an overflow is an algorithm bug.
    pub fn push_uint(&mut self, value: u64, width: u32) {
        assert!(
            width >= 64 || value < (1u64 << width),
            "value {value} does not fit in {width} bits"
        );
        for shift in (0..width).rev() {
            self.bits.push((value >> shift) & 1 == 1);
        }
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: &self.bits, pos: 0 }
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }
}

pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl BitReader<'_> {
    pub fn bit(&mut self) -> Option<bool> {
        let b = self.bits.get(self.pos).copied();
        self.pos += 1;
        b
    }

    pub fn uint(&mut self, width: u32) -> Option<u64> {
        if width > 64 {
            return None;
        }
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.bit()?);
        }
        Some(v)
    }

    pub fn remaining(&self) -> usize {
        self.bits.len().saturating_sub(self.pos)
    }
}

/// Fixed-width big-endian encoding of `value`.
pub fn encode_fixed(value: u64, width: u32) -> Vec<bool> {
    let mut cb = ControlBits::new();
    cb.push_uint(value, width);
    cb.bits
}

pub fn decode_fixed(bits: &[bool]) -> Option<u64> {
    if bits.len() > 64 {
        return None;
    }
    Some(bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn five_in_four_bits() {
        assert_eq!(encode_fixed(5, 4), vec![false, true, false, true]);
    }

    #[test]
    fn reader_runs_out() {
        let mut cb = ControlBits::new();
        cb.push_uint(3, 2);
        let mut r = cb.reader();
        assert_eq!(r.uint(2), Some(3));
        assert_eq!(r.bit(), None);
    }

    proptest! {
        #[test]
        fn fixed_width_round_trip(width in 1u32..40, raw in any::<u64>()) {
            let value = raw & ((1u64 << width) - 1);
            prop_assert_eq!(decode_fixed(&encode_fixed(value, width)), Some(value));
        }
    }
}
