//! The d-semifaithful random-codebook code.
//!
//! Encoder and decoder share a seed and hence an infinite codebook of
//! uniform i.i.d. codewords ([`CodebookStream`]). The encoder sends the
//! index of the first codeword inside the distortion ball around the source
//! block. Because the target channel is uniform on that ball, the
//! rejection-sampling acceptance ratio is exactly one inside and zero
//! outside, so no auxiliary uniforms are drawn: selection is plain ball
//! membership, checked exactly on the integer grid.
//!
//! The index is geometric with success probability `p`, the ball
//! probability, and `p` is a function of `(pair, n, D)` alone. Both sides
//! compute it, so the [`Scheme::Golomb`] code can be matched to the index
//! law without side information. [`Scheme::EliasDelta`] ignores `p`.

mod bits;
mod container;
mod elias;
mod golomb;
mod stream;

pub use bits::{BitReader, Bits};
pub use container::{decode_container, encode_blocks, Container, HEADER_LEN, MAGIC};
pub use elias::{
    elias_delta_decode, elias_delta_decode_from, elias_delta_encode, elias_delta_length,
    elias_delta_length_bits,
};
pub use golomb::{
    golomb_decode, golomb_decode_from, golomb_encode, golomb_length, golomb_parameter,
    golomb_parameter_ln, truncated_binary_layout,
};
pub use stream::{generate_codeword, mix64, CodebookStream};

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactdist::{ball_probability, BallMode, BallProbability, ExactError};
use crate::model::{ModelError, SymmetricPair};
use crate::numeric::{ln1m_over, ln_biguint, ln_rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("malformed bit string: {0}")]
    MalformedBits(String),
    #[error(
        "no codeword within distortion among the first {cap} (probability {failure_probability:e})"
    )]
    CapExceeded { cap: u64, failure_probability: f64 },
    #[error("distortion must lie in (0, D*)")]
    OutOfRange,
    #[error("source length {len} is not a multiple of the blocklength {n}")]
    BlockMismatch { len: usize, n: usize },
    #[error("malformed container: {0}")]
    Container(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Golomb,
    EliasDelta,
}

impl Scheme {
    pub fn tag(self) -> u8 {
        match self {
            Scheme::Golomb => 0,
            Scheme::EliasDelta => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Scheme::Golomb),
            1 => Some(Scheme::EliasDelta),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Golomb => "golomb",
            Scheme::EliasDelta => "elias",
        })
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "golomb" => Ok(Scheme::Golomb),
            "elias" | "elias-delta" | "elias_delta" => Ok(Scheme::EliasDelta),
            _ => Err(format!("unknown scheme {s:?}, expected golomb or elias")),
        }
    }
}

/// Geometric law `Pr(I = k) = (1-p)^{k-1} p` on `k ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexDistribution {
    p: Option<BigRational>,
    ln_p: f64,
}

impl IndexDistribution {
    pub fn from_exact(p: BigRational) -> Self {
        assert!(
            p.is_positive() && p <= BigRational::one(),
            "p must lie in (0, 1]"
        );
        Self {
            ln_p: ln_rational(&p),
            p: Some(p),
        }
    }

    pub fn from_ln(ln_p: f64) -> Self {
        assert!(
            ln_p <= 0.0 && ln_p.is_finite(),
            "ln p must be finite and non-positive"
        );
        Self { p: None, ln_p }
    }

    pub fn from_ball(ball: &BallProbability) -> Self {
        match &ball.prob {
            Some(p) => Self::from_exact(p.clone()),
            None => Self::from_ln(ball.log_prob),
        }
    }

    pub fn exact_p(&self) -> Option<&BigRational> {
        self.p.as_ref()
    }

    pub fn ln_p(&self) -> f64 {
        self.ln_p
    }

    /// May underflow to zero; use [`Self::ln_p`] for tiny balls.
    pub fn p(&self) -> f64 {
        self.ln_p.exp()
    }

    /// `ρ^x` with `ρ = 1 - p`, given `ln x`.
    fn rho_pow_ln(&self, ln_x: f64) -> f64 {
        (self.rho_exponent_ln(ln_x)).exp()
    }

    /// `x·ln ρ`, given `ln x`.
    fn rho_exponent_ln(&self, ln_x: f64) -> f64 {
        if ln_x == f64::NEG_INFINITY {
            return 0.0;
        }
        (ln_x + self.ln_p).exp() * ln1m_over(self.p())
    }

    pub fn pmf(&self, k: u64) -> f64 {
        assert!(k >= 1);
        (self.ln_p + self.rho_exponent_ln(((k - 1) as f64).ln())).exp()
    }

    /// `Pr(I > k) = ρ^k`.
    pub fn tail(&self, k: u64) -> f64 {
        self.rho_pow_ln((k as f64).ln())
    }

    /// `H(I) = h(p)/p` in nats.
    pub fn entropy_nats(&self) -> f64 {
        let p = self.p();
        -self.ln_p - (1.0 - p) * ln1m_over(p)
    }

    /// Golomb parameter matched to this law.
    pub fn golomb_parameter(&self) -> BigUint {
        match &self.p {
            Some(p) if p.is_one() => BigUint::one(),
            Some(p) => golomb_parameter(p),
            None => golomb_parameter_ln(self.ln_p),
        }
    }

    /// Expected Golomb codeword length in bits, in closed form.
    pub fn expected_golomb_bits(&self, m: &BigUint) -> f64 {
        let ln_m = ln_biguint(m);
        let e_m = self.rho_exponent_ln(ln_m);
        // 1 - ρ^m and ρ^m / (1 - ρ^m).
        let one_minus = -e_m.exp_m1();
        let mean_q = e_m.exp() / one_minus;
        let (k, u) = truncated_binary_layout(m);
        let short = if u.is_zero() {
            0.0
        } else {
            -self.rho_exponent_ln(ln_biguint(&u)).exp_m1()
        };
        mean_q + 1.0 + k as f64 - short / one_minus
    }

    /// Expected Elias delta length in bits, summed over octaves of `I` with a
    /// tail below `1e-13` bits.
    pub fn expected_elias_bits(&self) -> f64 {
        // S(j) = Pr(I ≥ 2^j) = ρ^{2^j - 1}.
        let s = |j: u64| -> f64 {
            if j == 0 {
                1.0
            } else {
                let ln_x = j as f64 * std::f64::consts::LN_2 + (-(0.5f64).powi(j as i32)).ln_1p();
                self.rho_pow_ln(ln_x)
            }
        };
        let mut total = 0.0;
        let mut j = 0u64;
        let mut cur = s(0);
        loop {
            let next = s(j + 1);
            total += (cur - next) * elias_delta_length_bits(j + 1) as f64;
            // S(j+1) squares at every step once below 1/2, so the remaining
            // mass is at most 2·S(j+1) spread over slowly growing lengths.
            if next <= 0.5 && 4.0 * next * elias_delta_length_bits(j + 3) as f64 <= 1e-13 {
                return total;
            }
            cur = next;
            j += 1;
        }
    }
}

/// Expected index-code length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedLength {
    pub bits: f64,
    pub nats: f64,
}

impl ExpectedLength {
    fn from_bits(bits: f64) -> Self {
        Self {
            bits,
            nats: bits * std::f64::consts::LN_2,
        }
    }
}

/// `E[len(code(I))]` for the index law at `(pair, n, D)`.
pub fn expected_length_exact(
    pair: &SymmetricPair,
    n: usize,
    radius: &BigRational,
    scheme: Scheme,
) -> Result<ExpectedLength, CodecError> {
    let ball = ball_probability(pair, n, radius, BallMode::Auto)?;
    Ok(expected_length(
        &IndexDistribution::from_ball(&ball),
        scheme,
    ))
}

pub fn expected_length(law: &IndexDistribution, scheme: Scheme) -> ExpectedLength {
    ExpectedLength::from_bits(match scheme {
        Scheme::Golomb => law.expected_golomb_bits(&law.golomb_parameter()),
        Scheme::EliasDelta => law.expected_elias_bits(),
    })
}

/// Default bound on the codebook search.
pub const DEFAULT_INDEX_CAP: u64 = 1 << 32;

/// Result of encoding one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub index: u64,
    pub bits: Bits,
    pub scheme: Scheme,
    pub codeword: Vec<usize>,
    /// `Q·n·d(x^n, y^n)` for the chosen codeword.
    pub distortion_scaled: u64,
}

/// Encoder and decoder for one `(pair, n, D, seed, scheme)`.
#[derive(Debug, Clone)]
pub struct Codec<'a> {
    pair: &'a SymmetricPair,
    n: usize,
    radius: BigRational,
    threshold: u64,
    stream: CodebookStream,
    scheme: Scheme,
    law: IndexDistribution,
    m: BigUint,
    index_cap: u64,
    table: Vec<u64>,
}

impl<'a> Codec<'a> {
    pub fn new(
        pair: &'a SymmetricPair,
        n: usize,
        radius: BigRational,
        seed: u64,
        scheme: Scheme,
    ) -> Result<Self, CodecError> {
        if !radius.is_positive() || &radius >= pair.d_star() {
            return Err(CodecError::OutOfRange);
        }
        let ball = ball_probability(pair, n, &radius, BallMode::Auto)?;
        let law = IndexDistribution::from_ball(&ball);
        let threshold = crate::numeric::floor_rational(
            &(&radius * BigRational::from_integer((n as u64 * pair.scale()).into())),
        )
        .to_u64()
        .unwrap_or(u64::MAX);
        let k = pair.size();
        let table = (0..k * k)
            .map(|i| pair.matrix().scaled(i / k, i % k))
            .collect();
        Ok(Self {
            pair,
            n,
            radius,
            threshold,
            stream: CodebookStream::new(seed, n, k),
            scheme,
            m: law.golomb_parameter(),
            law,
            index_cap: DEFAULT_INDEX_CAP,
            table,
        })
    }

    /// Same code with a different common-randomness seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.stream = CodebookStream::new(seed, self.n, self.pair.size());
        c
    }

    pub fn with_index_cap(mut self, cap: u64) -> Self {
        self.index_cap = cap.max(1);
        self
    }

    pub fn pair(&self) -> &SymmetricPair {
        self.pair
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> &BigRational {
        &self.radius
    }

    pub fn seed(&self) -> u64 {
        self.stream.seed()
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn index_law(&self) -> &IndexDistribution {
        &self.law
    }

    pub fn golomb_m(&self) -> &BigUint {
        &self.m
    }

    pub fn stream(&self) -> &CodebookStream {
        &self.stream
    }

    /// Scaled distortion of codeword `index` against the block whose row
    /// offsets into the distortion table are `rows`, or `None` once it
    /// exceeds the ball threshold.
    #[inline]
    fn within(&self, rows: &[usize], index: u64) -> Option<u64> {
        let k = self.pair.size();
        let pow2 = k.is_power_of_two().then(|| k.trailing_zeros());
        let key = self.stream.row_key(index);
        let mut acc = 0u64;
        let mut w = [0u64; 8];
        for (c, chunk) in rows.chunks(8).enumerate() {
            let t0 = (c * 8) as u64 + 1;
            // Independent lanes so the mixing vectorizes.
            for (j, slot) in w.iter_mut().enumerate() {
                *slot = mix64(key ^ (t0 + j as u64));
            }
            match pow2 {
                Some(b) => {
                    for (&row, &wj) in chunk.iter().zip(&w) {
                        acc += self.table[row + stream::reduce_pow2(wj, b)];
                    }
                }
                None => {
                    for (&row, &wj) in chunk.iter().zip(&w) {
                        acc += self.table[row + stream::reduce(wj, k)];
                    }
                }
            }
            if acc > self.threshold {
                return None;
            }
        }
        Some(acc)
    }

    /// First index in the ball for a binary block, testing four consecutive
    /// candidates in lockstep. Each candidate's verdict is independent of
    /// the others, so the smallest accepting lane is the first in-ball index.
    fn search_binary(&self, x: &[usize], max_mismatches: u64) -> Option<(u64, u64)> {
        const LANES: u64 = 4;
        const STRIDE: usize = 4;
        let xs: Vec<u64> = x.iter().map(|&s| s as u64).collect();
        let mut first = 1u64;
        while first <= self.index_cap {
            let mut keys = [0u64; LANES as usize];
            for (l, k) in keys.iter_mut().enumerate() {
                *k = self.stream.row_key(first + l as u64);
            }
            let mut acc = [0u64; LANES as usize];
            let mut rejected = false;
            for (c, chunk) in xs.chunks(STRIDE).enumerate() {
                for (j, &xb) in chunk.iter().enumerate() {
                    let t = (c * STRIDE + j) as u64 + 1;
                    for (a, &k) in acc.iter_mut().zip(&keys) {
                        *a += stream::mix64_top_bit(k ^ t) ^ xb;
                    }
                }
                if acc.iter().all(|&a| a > max_mismatches) {
                    rejected = true;
                    break;
                }
            }
            if !rejected {
                let hit = acc
                    .iter()
                    .enumerate()
                    .find(|&(l, &a)| a <= max_mismatches && first + (l as u64) <= self.index_cap);
                if let Some((l, &a)) = hit {
                    return Some((first + l as u64, a));
                }
            }
            first = first.saturating_add(LANES);
        }
        None
    }

    /// Smallest index whose codeword lies in the ball around `x`, with the
    /// codeword's scaled distortion.
    pub fn search(&self, x: &[usize]) -> Result<(u64, u64), CodecError> {
        self.check_block(x)?;
        let k = self.pair.size();
        if k == 2 {
            // A binary symmetric pair is [[0, a], [a, 0]]: count mismatches.
            let a = self.table[1];
            if let Some((i, m)) = self.search_binary(x, self.threshold / a) {
                return Ok((i, m * a));
            }
        } else {
            let rows: Vec<usize> = x.iter().map(|&s| s * k).collect();
            for i in 1..=self.index_cap {
                if let Some(d) = self.within(&rows, i) {
                    return Ok((i, d));
                }
            }
        }
        Err(CodecError::CapExceeded {
            cap: self.index_cap,
            failure_probability: self.law.tail(self.index_cap),
        })
    }

    fn check_block(&self, x: &[usize]) -> Result<(), CodecError> {
        if x.len() != self.n {
            return Err(ModelError::LengthMismatch {
                source_len: x.len(),
                reconstruction_len: self.n,
            }
            .into());
        }
        let size = self.pair.size();
        if let Some((position, &symbol)) = x.iter().enumerate().find(|(_, &s)| s >= size) {
            return Err(ModelError::SymbolOutOfRange {
                position,
                symbol,
                size,
            }
            .into());
        }
        Ok(())
    }

    pub fn encode_index(&self, index: u64) -> Bits {
        let i = BigUint::from(index);
        match self.scheme {
            Scheme::Golomb => golomb_encode(&i, &self.m),
            Scheme::EliasDelta => elias_delta_encode(&i),
        }
    }

    pub fn decode_index(&self, reader: &mut BitReader<'_>) -> Result<u64, CodecError> {
        let i = match self.scheme {
            Scheme::Golomb => golomb_decode_from(reader, &self.m)?,
            Scheme::EliasDelta => elias_delta_decode_from(reader)?,
        };
        i.to_u64()
            .ok_or_else(|| CodecError::MalformedBits("index exceeds 64 bits".into()))
    }

    pub fn encode(&self, x: &[usize]) -> Result<Encoded, CodecError> {
        let (index, distortion_scaled) = self.search(x)?;
        Ok(Encoded {
            index,
            bits: self.encode_index(index),
            scheme: self.scheme,
            codeword: self.stream.codeword(index),
            distortion_scaled,
        })
    }

    pub fn decode(&self, bits: &Bits) -> Result<Vec<usize>, CodecError> {
        let mut r = bits.reader();
        let out = self.decode_from(&mut r)?;
        if r.remaining() != 0 {
            return Err(CodecError::MalformedBits(
                "trailing bits after codeword".into(),
            ));
        }
        Ok(out)
    }

    pub fn decode_from(&self, reader: &mut BitReader<'_>) -> Result<Vec<usize>, CodecError> {
        Ok(self.stream.codeword(self.decode_index(reader)?))
    }
}

#[cfg(test)]
mod tests;
