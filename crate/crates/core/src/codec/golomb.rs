//! Golomb codes for geometric indices.
//!
//! `i ≥ 1` is split as `i - 1 = q·m + r`; `q` is sent in unary (`q` ones and
//! a zero), `r` in truncated binary: with `k = ceil(log2 m)` and
//! `u = 2^k - m`, remainders below `u` take `k - 1` bits and the rest `k`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::bits::{BitReader, Bits};
use super::CodecError;
use crate::numeric::{ln2_fixed, ln_rational, rational_to_f64};

/// `(k, u)` of the truncated binary layout for `m`.
pub fn truncated_binary_layout(m: &BigUint) -> (u64, BigUint) {
    let k = (m - 1u32).bits();
    let u = (BigUint::one() << k) - m;
    (k, u)
}

/// Codeword length of `i` under parameter `m`.
pub fn golomb_length(i: &BigUint, m: &BigUint) -> BigUint {
    let (q, r) = (i - 1u32).div_rem(m);
    let (k, u) = truncated_binary_layout(m);
    let rbits = if r < u { k - 1 } else { k };
    q + 1u32 + rbits
}

pub fn golomb_encode(i: &BigUint, m: &BigUint) -> Bits {
    assert!(
        !i.is_zero() && !m.is_zero(),
        "index and parameter must be positive"
    );
    let mut bits = Bits::new();
    let (q, r) = (i - 1u32).div_rem(m);
    let q = q.to_usize().expect("unary part fits in memory");
    bits.push_repeated(true, q);
    bits.push(false);
    let (k, u) = truncated_binary_layout(m);
    if r < u {
        bits.push_uint(&r, k - 1);
    } else {
        bits.push_uint(&(r + u), k);
    }
    bits
}

pub fn golomb_decode_from(reader: &mut BitReader<'_>, m: &BigUint) -> Result<BigUint, CodecError> {
    let mut q = BigUint::zero();
    while reader.read_bit()? {
        q += 1u32;
    }
    let (k, u) = truncated_binary_layout(m);
    let r = if k == 0 {
        BigUint::zero()
    } else {
        let v = reader.read_uint(k - 1)?;
        if v < u {
            v
        } else {
            let b = u32::from(reader.read_bit()?);
            (v << 1u32) + b - u
        }
    };
    Ok(q * m + r + 1u32)
}

/// Decodes exactly one codeword occupying all of `bits`.
pub fn golomb_decode(bits: &Bits, m: &BigUint) -> Result<BigUint, CodecError> {
    let mut r = bits.reader();
    let i = golomb_decode_from(&mut r, m)?;
    if r.remaining() != 0 {
        return Err(CodecError::MalformedBits(
            "trailing bits after codeword".into(),
        ));
    }
    Ok(i)
}

/// Below this acceptance probability the parameter comes from its
/// asymptotic expansion `m = ceil(ln 2 / p - (1 + ln 2)/2)`.
const SMALL_P_LOG2: i32 = -50;

/// Smallest `m ≥ 1` with `(1-p)^m + (1-p)^{m+1} ≤ 1`.
///
/// Encoder and decoder both derive `m` from the same exact `p`, so the
/// floating-point evaluation is deterministic across the two sides.
pub fn golomb_parameter(p: &BigRational) -> BigUint {
    assert!(
        *p > BigRational::zero() && *p < BigRational::one(),
        "p must lie in (0, 1)"
    );
    if ln_rational(p) >= SMALL_P_LOG2 as f64 * std::f64::consts::LN_2 {
        return golomb_parameter_f64(rational_to_f64(p));
    }
    // ceil(ln2·b/a - (1 + ln2)/2) in fixed point with ample guard bits.
    let bits = 64 + (p.denom().bits().max(p.numer().bits()));
    let ln2 = ln2_fixed(bits);
    let one = BigUint::one() << bits;
    let (a, b) = (p.numer().magnitude(), p.denom().magnitude());
    let main = &ln2 * b / a;
    let correction = (&one + &ln2) >> 1u32;
    let m = (main - correction + &one - 1u32) >> bits;
    m.max(BigUint::one())
}

/// [`golomb_parameter`] from a floating-point `p` (or its logarithm, when
/// `p` underflows).
pub fn golomb_parameter_ln(ln_p: f64) -> BigUint {
    if ln_p >= SMALL_P_LOG2 as f64 * std::f64::consts::LN_2 {
        return golomb_parameter_f64(ln_p.exp());
    }
    let ln_m = std::f64::consts::LN_2.ln() - ln_p;
    biguint_from_ln(ln_m)
}

fn golomb_parameter_f64(p: f64) -> BigUint {
    // ρ^m (1 + ρ) ≤ 1  ⇔  m ≥ ln(1 + ρ) / -ln ρ, with ρ = 1 - p.
    let x = (std::f64::consts::LN_2 + (-p / 2.0).ln_1p()) / -(-p).ln_1p();
    BigUint::from(x.ceil().max(1.0) as u64)
}

/// `ceil(e^x)` to 53 significant bits.
fn biguint_from_ln(x: f64) -> BigUint {
    let e2 = x / std::f64::consts::LN_2;
    if e2 < 62.0 {
        return BigUint::from(x.exp().ceil() as u64);
    }
    let whole = e2.floor();
    let mantissa = (2f64.powf(e2 - whole + 52.0)).ceil() as u64;
    BigUint::from(mantissa) << (whole as u64 - 52)
}
