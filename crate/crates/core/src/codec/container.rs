//! Self-describing container for a sequence of encoded blocks.
//!
//! Layout, integers little-endian:
//!
//! | bytes | field |
//! |------:|-------|
//! | 6     | magic `SYMRD1` |
//! | 8     | blocklength `n` |
//! | 8, 8  | distortion `D` as numerator, denominator |
//! | 8     | seed |
//! | 1     | scheme tag (0 Golomb, 1 Elias delta) |
//! | 32    | SHA-256 fingerprint of the pair |
//! | 8     | number of blocks |
//! | 8     | payload length in bits |
//! | ...   | payload, the concatenated index codes, zero-padded to a byte |

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::{Bits, Codec, CodecError, Encoded, Scheme};
use crate::model::SymmetricPair;

pub const MAGIC: &[u8; 6] = b"SYMRD1";
pub const HEADER_LEN: usize = 6 + 8 * 4 + 1 + 32 + 8 + 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    pub n: u64,
    pub radius_num: u64,
    pub radius_den: u64,
    pub seed: u64,
    pub scheme: Scheme,
    pub pair_hash: [u8; 32],
    pub blocks: u64,
    pub payload: Bits,
}

impl Container {
    pub fn radius(&self) -> BigRational {
        BigRational::new(BigInt::from(self.radius_num), BigInt::from(self.radius_den))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.as_bytes().len());
        out.extend_from_slice(MAGIC);
        for v in [self.n, self.radius_num, self.radius_den, self.seed] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.push(self.scheme.tag());
        out.extend_from_slice(&self.pair_hash);
        out.extend_from_slice(&self.blocks.to_le_bytes());
        out.extend_from_slice(&(self.payload.len() as u64).to_le_bytes());
        out.extend_from_slice(self.payload.as_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let bad = |m: &str| CodecError::Container(m.to_string());
        if bytes.len() < HEADER_LEN {
            return Err(bad("shorter than the header"));
        }
        if &bytes[..6] != MAGIC {
            return Err(bad("bad magic"));
        }
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        let scheme = Scheme::from_tag(bytes[38]).ok_or_else(|| bad("unknown scheme tag"))?;
        let mut pair_hash = [0u8; 32];
        pair_hash.copy_from_slice(&bytes[39..71]);
        let bit_len = u64_at(79) as usize;
        let payload = &bytes[HEADER_LEN..];
        if payload.len() != bit_len.div_ceil(8) {
            return Err(bad("payload length does not match header"));
        }
        let c = Self {
            n: u64_at(6),
            radius_num: u64_at(14),
            radius_den: u64_at(22),
            seed: u64_at(30),
            scheme,
            pair_hash,
            blocks: u64_at(71),
            payload: Bits::from_bytes(payload, bit_len)?,
        };
        if c.n == 0 || c.radius_den == 0 {
            return Err(bad("zero blocklength or denominator"));
        }
        Ok(c)
    }
}

/// Encodes `source` block by block.
pub fn encode_blocks(
    codec: &Codec<'_>,
    source: &[usize],
) -> Result<(Container, Vec<Encoded>), CodecError> {
    let n = codec.n();
    if !source.len().is_multiple_of(n) {
        return Err(CodecError::BlockMismatch {
            len: source.len(),
            n,
        });
    }
    let r = codec.radius();
    let (num, den) = (r.numer().to_u64(), r.denom().to_u64());
    let (Some(radius_num), Some(radius_den)) = (num, den) else {
        return Err(CodecError::Container(
            "distortion does not fit in 64-bit fields".into(),
        ));
    };
    let mut payload = Bits::new();
    let mut blocks = Vec::with_capacity(source.len() / n);
    for x in source.chunks(n) {
        let e = codec.encode(x)?;
        payload.extend(&e.bits);
        blocks.push(e);
    }
    let container = Container {
        n: n as u64,
        radius_num,
        radius_den,
        seed: codec.seed(),
        scheme: codec.scheme(),
        pair_hash: codec.pair().fingerprint(),
        blocks: blocks.len() as u64,
        payload,
    };
    Ok((container, blocks))
}

/// Reconstruction of every block in `container`.
pub fn decode_container(
    pair: &SymmetricPair,
    container: &Container,
) -> Result<Vec<usize>, CodecError> {
    if container.pair_hash != pair.fingerprint() {
        return Err(CodecError::Container("pair fingerprint mismatch".into()));
    }
    let codec = Codec::new(
        pair,
        container.n as usize,
        container.radius(),
        container.seed,
        container.scheme,
    )?;
    let mut reader = container.payload.reader();
    let mut out = Vec::with_capacity(container.n as usize * container.blocks as usize);
    for _ in 0..container.blocks {
        out.extend(codec.decode_from(&mut reader)?);
    }
    if reader.remaining() != 0 {
        return Err(CodecError::MalformedBits(
            "trailing bits after last block".into(),
        ));
    }
    Ok(out)
}
