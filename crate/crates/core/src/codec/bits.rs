//! Packed bit strings, most significant bit first within each byte.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;

use super::CodecError;

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Bits {
    bytes: Vec<u8>,
    len: usize,
}

impl Bits {
    pub fn new() -> Self {
        Self::default()
    }

    /// Takes the first `len` bits of `bytes`.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self, CodecError> {
        if len > bytes.len() * 8 {
            return Err(CodecError::MalformedBits(
                "bit length exceeds payload".into(),
            ));
        }
        let mut bytes = bytes[..len.div_ceil(8)].to_vec();
        if !len.is_multiple_of(8) {
            let last = bytes.len() - 1;
            bytes[last] &= 0xFFu8 << (8 - len % 8);
        }
        Ok(Self { bytes, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        (i < self.len).then(|| self.bytes[i / 8] >> (7 - i % 8) & 1 == 1)
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[self.len / 8] |= 1 << (7 - self.len % 8);
        }
        self.len += 1;
    }

    pub fn push_repeated(&mut self, bit: bool, count: usize) {
        for _ in 0..count {
            self.push(bit);
        }
    }

    /// Low `width` bits of `value`, most significant first.
    pub fn push_uint(&mut self, value: &BigUint, width: u64) {
        for i in (0..width).rev() {
            self.push(value.bit(i));
        }
    }

    pub fn extend(&mut self, other: &Bits) {
        for i in 0..other.len {
            self.push(other.get(i).unwrap_or(false));
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i).unwrap_or(false))
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: self, pos: 0 }
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Bits::new();
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => {
                    return Err(CodecError::MalformedBits(format!(
                        "unexpected character {c:?}"
                    )))
                }
            }
        }
        Ok(bits)
    }
}

/// Sequential reader over a [`Bits`].
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bits: &'a Bits,
    pos: usize,
}

impl BitReader<'_> {
    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool, CodecError> {
        let b = self
            .bits
            .get(self.pos)
            .ok_or_else(|| CodecError::MalformedBits("unexpected end of bits".into()))?;
        self.pos += 1;
        Ok(b)
    }

    pub fn read_uint(&mut self, width: u64) -> Result<BigUint, CodecError> {
        if width > self.remaining() as u64 {
            return Err(CodecError::MalformedBits("unexpected end of bits".into()));
        }
        let mut v = BigUint::zero();
        for _ in 0..width {
            v <<= 1u32;
            if self.read_bit()? {
                v += 1u32;
            }
        }
        Ok(v)
    }
}
