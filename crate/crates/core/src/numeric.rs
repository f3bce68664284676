//! Conversions between exact big numbers and floating point.
//!
//! Ball probabilities at blocklengths in the thousands are far below the
//! smallest positive `f64`, so everything that leaves the exact world goes
//! through the natural log first.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Natural log of a positive big integer.
pub fn ln_biguint(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "log of zero");
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite below 2^1000").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit mantissa");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of `num / den`, both positive.
pub fn ln_ratio(num: &BigUint, den: &BigUint) -> f64 {
    ln_biguint(num) - ln_biguint(den)
}

/// Natural log of a positive rational.
pub fn ln_rational(x: &BigRational) -> f64 {
    assert!(x.is_positive(), "log of non-positive rational");
    ln_ratio(x.numer().magnitude(), x.denom().magnitude())
}

/// `num / den` rounded to `f64`, correct to a few ulps even when both
/// operands are far outside the `f64` range.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    assert!(!den.is_zero(), "division by zero");
    if num.is_zero() {
        return 0.0;
    }
    // Scale so the integer quotient carries 64 significant bits.
    let shift = 64 + den.bits() as i64 - num.bits() as i64;
    let q = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let mantissa = q.to_f64().expect("quotient fits in f64");
    scale_by_pow2(mantissa, -shift)
}

/// Rational to `f64` (see [`ratio_to_f64`]).
pub fn rational_to_f64(x: &BigRational) -> f64 {
    let v = ratio_to_f64(x.numer().magnitude(), x.denom().magnitude());
    if x.numer().sign() == Sign::Minus {
        -v
    } else {
        v
    }
}

fn scale_by_pow2(mut x: f64, mut exp: i64) -> f64 {
    // Apply in steps so intermediate powers never overflow on their own.
    while exp > 1000 {
        x *= 2f64.powi(1000);
        exp -= 1000;
    }
    while exp < -1000 {
        x *= 2f64.powi(-1000);
        exp += 1000;
    }
    x * 2f64.powi(exp as i32)
}

/// Exact rational from a finite `f64`.
pub fn f64_to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// `floor(x)` for a rational, as a big integer.
pub fn floor_rational(x: &BigRational) -> BigInt {
    x.floor().to_integer()
}

/// `ln 2` in fixed point: returns `floor(ln 2 * 2^bits)` up to an error of a
/// few units in the last place.
///
/// Uses `ln 2 = sum_{k>=1} 1 / (k 2^k)`, which gains one bit per term.
pub fn ln2_fixed(bits: u64) -> BigUint {
    let guard = 16;
    let scale = BigUint::one() << (bits + guard);
    let mut acc = BigUint::zero();
    let mut k: u64 = 1;
    loop {
        let term = (&scale >> k) / BigUint::from(k);
        if term.is_zero() {
            break;
        }
        acc += term;
        k += 1;
    }
    acc >> guard
}

/// `ln(1 - p) / p` for `p` in `(0, 1)`, accurate even when `p` underflows.
pub fn ln1m_over(p: f64) -> f64 {
    if p < 1e-8 {
        -1.0 - p / 2.0
    } else {
        (-p).ln_1p() / p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_handles_huge_operands() {
        let den = BigUint::one() << 5000u32;
        let num = BigUint::from(3u32) << 4998u32;
        assert!((ratio_to_f64(&num, &den) - 0.75).abs() < 1e-15);
        assert!((ln_ratio(&num, &den) - 0.75f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ratio_underflows_gracefully() {
        let den = BigUint::one() << 2000u32;
        assert_eq!(ratio_to_f64(&BigUint::one(), &den), 0.0);
        let ln = ln_ratio(&BigUint::one(), &den);
        assert!((ln + 2000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn ln2_matches_float() {
        let v = ln2_fixed(60);
        let approx = v.to_f64().unwrap() / 2f64.powi(60);
        assert!((approx - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn ln1m_over_small_and_moderate() {
        assert!((ln1m_over(0.5) - 2.0 * 0.5f64.ln()).abs() < 1e-15);
        assert!((ln1m_over(1e-300) + 1.0).abs() < 1e-15);
    }
}
