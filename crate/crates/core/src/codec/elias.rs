//! Elias delta codes: the bit length of `i` in Elias gamma, then `i` without
//! its leading one.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::bits::{BitReader, Bits};
use super::CodecError;

/// `floor(log2 i) + 2 floor(log2(floor(log2 i) + 1)) + 1`.
pub fn elias_delta_length_bits(bit_len: u64) -> u64 {
    let l = 64 - bit_len.leading_zeros() as u64;
    bit_len + 2 * l - 2
}

pub fn elias_delta_length(i: &BigUint) -> u64 {
    elias_delta_length_bits(i.bits())
}

pub fn elias_delta_encode(i: &BigUint) -> Bits {
    assert!(!i.is_zero(), "Elias delta codes start at 1");
    let n = i.bits();
    let l = 64 - n.leading_zeros() as u64;
    let mut bits = Bits::new();
    bits.push_repeated(false, (l - 1) as usize);
    bits.push_uint(&BigUint::from(n), l);
    bits.push_uint(i, n - 1);
    bits
}

pub fn elias_delta_decode_from(reader: &mut BitReader<'_>) -> Result<BigUint, CodecError> {
    let mut zeros = 0u64;
    while !reader.read_bit()? {
        zeros += 1;
        if zeros >= 64 {
            return Err(CodecError::MalformedBits(
                "Elias length prefix too long".into(),
            ));
        }
    }
    let rest = reader.read_uint(zeros)?;
    let n = ((BigUint::one() << zeros) + rest)
        .to_u64()
        .ok_or_else(|| CodecError::MalformedBits("Elias length overflow".into()))?;
    let low = reader.read_uint(n - 1)?;
    Ok((BigUint::one() << (n - 1)) + low)
}

pub fn elias_delta_decode(bits: &Bits) -> Result<BigUint, CodecError> {
    let mut r = bits.reader();
    let i = elias_delta_decode_from(&mut r)?;
    if r.remaining() != 0 {
        return Err(CodecError::MalformedBits(
            "trailing bits after codeword".into(),
        ));
    }
    Ok(i)
}
