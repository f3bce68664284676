//! Exact finite-`n` distributions of the block distortion.
//!
//! With `Y` uniform and i.i.d., the scaled block distortion
//! `T = Σ Q·d(x_i, Y_i)` has the same law for every source string (rows are
//! permutations of each other). A [`DistortionSpectrum`] stores that law as
//! integer counts over the `k^n` reconstruction strings, so every probability
//! derived from it is an exact rational.
//!
//! Balls are closed: `B(x^n, D) = { y^n : d(x^n, y^n) ≤ D }`, which on the
//! grid is `T ≤ floor(n·Q·D)`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::{block_distortion_scaled, SymmetricPair};
use crate::numeric::{floor_rational, ln_biguint, ratio_to_f64};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("exact computation needs about {needed} bits, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("blocklength must be at least 1")]
    ZeroBlocklength,
    #[error("ball radius must be non-negative")]
    NegativeRadius,
    #[error("conditioning event has probability zero")]
    EmptyEvent,
    #[error("row {row} out of range for alphabet of size {size}")]
    BadRow { row: usize, size: usize },
}

/// Memory budget for exact spectra, in bits of big-integer storage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactBudget {
    pub max_bits: u64,
}

impl Default for ExactBudget {
    fn default() -> Self {
        Self { max_bits: 1 << 31 }
    }
}

impl ExactBudget {
    fn estimate(pair: &SymmetricPair, n: usize) -> u64 {
        let support = (n as u64) * max_letter(pair) + 1;
        let bits_per_count = (n as f64 * (pair.size() as f64).log2()).ceil() as u64 + 1;
        support.saturating_mul(bits_per_count)
    }

    pub fn check(&self, pair: &SymmetricPair, n: usize) -> Result<(), ExactError> {
        let needed = Self::estimate(pair, n);
        if needed > self.max_bits {
            Err(ExactError::BudgetExceeded {
                needed,
                budget: self.max_bits,
            })
        } else {
            Ok(())
        }
    }
}

fn max_letter(pair: &SymmetricPair) -> u64 {
    pair.scaled_letter().last().copied().unwrap_or(0)
}

/// Distinct scaled per-letter distortions with their multiplicities.
fn letter_law(values: &[u64]) -> Vec<(usize, u32)> {
    let mut v = values.to_vec();
    v.sort_unstable();
    let mut law: Vec<(usize, u32)> = Vec::new();
    for x in v {
        match law.last_mut() {
            Some((val, c)) if *val == x as usize => *c += 1,
            _ => law.push((x as usize, 1)),
        }
    }
    law
}

/// Exact law of the scaled block distortion under the uniform proposal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistortionSpectrum {
    n: usize,
    scale: u64,
    alphabet: usize,
    counts: Vec<BigUint>,
}

impl DistortionSpectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    /// Number of reconstruction strings at each scaled total.
    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    /// `k^n`.
    pub fn total(&self) -> BigUint {
        BigUint::from(self.alphabet).pow(self.n as u32)
    }

    pub fn pmf(&self, t: usize) -> BigRational {
        let c = self.counts.get(t).cloned().unwrap_or_default();
        BigRational::new(BigInt::from(c), BigInt::from(self.total()))
    }

    /// Largest attainable scaled total.
    pub fn max_total(&self) -> u64 {
        (self.counts.len() - 1) as u64
    }

    /// `floor(n·Q·D)`, the largest scaled total inside the closed ball.
    pub fn threshold(&self, radius: &BigRational) -> Result<u64, ExactError> {
        threshold(self.n, self.scale, radius)
    }

    /// Number of strings with scaled total at most `threshold`.
    pub fn ball_count(&self, threshold: u64) -> BigUint {
        let end = (threshold.min(self.max_total()) as usize) + 1;
        self.counts[..end].iter().sum()
    }

    pub fn ball_probability(&self, threshold: u64) -> BigRational {
        BigRational::new(
            BigInt::from(self.ball_count(threshold)),
            BigInt::from(self.total()),
        )
    }

    pub fn log_ball_probability(&self, threshold: u64) -> f64 {
        ln_biguint(&self.ball_count(threshold)) - self.n as f64 * (self.alphabet as f64).ln()
    }

    /// Law of the scaled total conditioned on landing in the ball, as floats.
    pub fn ball_conditional(&self, threshold: u64) -> Vec<f64> {
        let z = self.ball_count(threshold);
        let end = (threshold.min(self.max_total()) as usize) + 1;
        self.counts[..end]
            .iter()
            .map(|c| ratio_to_f64(c, &z))
            .collect()
    }
}

fn threshold(n: usize, scale: u64, radius: &BigRational) -> Result<u64, ExactError> {
    if radius.is_negative() {
        return Err(ExactError::NegativeRadius);
    }
    let t = floor_rational(&(radius * BigRational::from_integer(BigInt::from(n as u64 * scale))));
    Ok(t.to_u64().unwrap_or(u64::MAX))
}

/// Builds spectra for `n = 1, 2, ...` one convolution step at a time.
#[derive(Debug, Clone)]
pub struct SpectrumBuilder {
    law: Vec<(usize, u32)>,
    current: DistortionSpectrum,
}

impl SpectrumBuilder {
    pub fn new(pair: &SymmetricPair) -> Self {
        Self::for_values(pair, pair.matrix().scaled_row(0))
    }

    fn for_values(pair: &SymmetricPair, values: &[u64]) -> Self {
        let current = DistortionSpectrum {
            n: 0,
            scale: pair.scale(),
            alphabet: pair.size(),
            counts: vec![BigUint::one()],
        };
        Self {
            law: letter_law(values),
            current,
        }
    }

    /// Advances to blocklength `n + 1`.
    pub fn step(&mut self) -> &DistortionSpectrum {
        let max_v = self.law.last().map(|&(v, _)| v).unwrap_or(0);
        let counts = &mut self.current.counts;
        let old_len = counts.len();
        counts.resize(old_len + max_v, BigUint::zero());
        // In place, high to low: every read index t - v is still the old value.
        for t in (0..counts.len()).rev() {
            let mut acc = BigUint::zero();
            for &(v, c) in &self.law {
                if t >= v && t - v < old_len {
                    if c == 1 {
                        acc += &counts[t - v];
                    } else {
                        acc += &counts[t - v] * c;
                    }
                }
            }
            counts[t] = acc;
        }
        self.current.n += 1;
        &self.current
    }

    pub fn current(&self) -> &DistortionSpectrum {
        &self.current
    }

    pub fn into_spectrum(self) -> DistortionSpectrum {
        self.current
    }
}

/// Exact spectrum at blocklength `n`, within the default budget.
pub fn spectrum(pair: &SymmetricPair, n: usize) -> Result<DistortionSpectrum, ExactError> {
    spectrum_with_budget(pair, n, &ExactBudget::default())
}

pub fn spectrum_with_budget(
    pair: &SymmetricPair,
    n: usize,
    budget: &ExactBudget,
) -> Result<DistortionSpectrum, ExactError> {
    spectrum_from_row(pair, n, 0, budget)
}

/// Spectrum built from the distortions of source letter `row`.
pub fn spectrum_from_row(
    pair: &SymmetricPair,
    n: usize,
    row: usize,
    budget: &ExactBudget,
) -> Result<DistortionSpectrum, ExactError> {
    if n == 0 {
        return Err(ExactError::ZeroBlocklength);
    }
    if row >= pair.size() {
        return Err(ExactError::BadRow {
            row,
            size: pair.size(),
        });
    }
    budget.check(pair, n)?;
    let mut b = SpectrumBuilder::for_values(pair, pair.matrix().scaled_row(row));
    for _ in 0..n {
        b.step();
    }
    Ok(b.into_spectrum())
}

/// Log-domain spectrum: `ln Pr(T = t)` by log-sum-exp convolution.
pub fn log_spectrum(pair: &SymmetricPair, n: usize) -> Result<Vec<f64>, ExactError> {
    if n == 0 {
        return Err(ExactError::ZeroBlocklength);
    }
    let k = pair.size() as f64;
    let law: Vec<(usize, f64)> = letter_law(pair.matrix().scaled_row(0))
        .into_iter()
        .map(|(v, c)| (v, (c as f64 / k).ln()))
        .collect();
    let max_v = law.last().map(|&(v, _)| v).unwrap_or(0);
    let mut cur = vec![0.0f64];
    for _ in 0..n {
        let mut next = vec![f64::NEG_INFINITY; cur.len() + max_v];
        for (t, slot) in next.iter_mut().enumerate() {
            let terms = law
                .iter()
                .filter(|&&(v, _)| t >= v && t - v < cur.len())
                .map(|&(v, lp)| cur[t - v] + lp);
            *slot = log_sum_exp(terms);
        }
        cur = next;
    }
    Ok(cur)
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallMode {
    /// Exact rationals; fails above the budget.
    Exact,
    /// Log-domain float DP.
    Log,
    /// Exact within the budget, log-domain above it.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallProbability {
    pub n: usize,
    pub radius: BigRational,
    /// Exact value, when computed exactly.
    pub prob: Option<BigRational>,
    pub log_prob: f64,
    /// True when the value came from the float DP.
    pub approx: bool,
}

/// `Pr(d(x^n, Y^n) ≤ D)` for uniform i.i.d. `Y^n`; the same for every `x^n`.
pub fn ball_probability(
    pair: &SymmetricPair,
    n: usize,
    radius: &BigRational,
    mode: BallMode,
) -> Result<BallProbability, ExactError> {
    ball_probability_with_budget(pair, n, radius, mode, &ExactBudget::default())
}

pub fn ball_probability_with_budget(
    pair: &SymmetricPair,
    n: usize,
    radius: &BigRational,
    mode: BallMode,
    budget: &ExactBudget,
) -> Result<BallProbability, ExactError> {
    if n == 0 {
        return Err(ExactError::ZeroBlocklength);
    }
    let t = threshold(n, pair.scale(), radius)?;
    let exact = match mode {
        BallMode::Exact => true,
        BallMode::Log => false,
        BallMode::Auto => budget.check(pair, n).is_ok(),
    };
    if t >= n as u64 * max_letter(pair) {
        return Ok(BallProbability {
            n,
            radius: radius.clone(),
            prob: exact.then(BigRational::one),
            log_prob: 0.0,
            approx: !exact,
        });
    }
    if exact {
        let s = spectrum_with_budget(pair, n, budget)?;
        Ok(BallProbability {
            n,
            radius: radius.clone(),
            prob: Some(s.ball_probability(t)),
            log_prob: s.log_ball_probability(t),
            approx: false,
        })
    } else {
        let lp = log_spectrum(pair, n)?;
        let log_prob = log_sum_exp(lp[..=t as usize].iter().copied()).min(0.0);
        Ok(BallProbability {
            n,
            radius: radius.clone(),
            prob: None,
            log_prob,
            approx: true,
        })
    }
}

/// `E[S_n | S_n ≥ c]` with `S_n = -(1/n) Σ d(x_i, Y_i)`, exactly.
pub fn conditional_tail_mean_of(
    spectrum: &DistortionSpectrum,
    c: &BigRational,
) -> Result<BigRational, ExactError> {
    // S_n ≥ c  ⇔  T ≤ -c·n·Q.
    let radius = -c;
    if radius.is_negative() {
        return Err(ExactError::EmptyEvent);
    }
    let t_max = spectrum.threshold(&radius)?.min(spectrum.max_total()) as usize;
    let mut mass = BigUint::zero();
    let mut first = BigUint::zero();
    for (t, cnt) in spectrum.counts[..=t_max].iter().enumerate() {
        mass += cnt;
        first += cnt * BigUint::from(t);
    }
    if mass.is_zero() {
        return Err(ExactError::EmptyEvent);
    }
    let nq = BigUint::from(spectrum.n as u64 * spectrum.scale);
    Ok(-BigRational::new(
        BigInt::from(first),
        BigInt::from(nq * mass),
    ))
}

pub fn conditional_tail_mean(
    pair: &SymmetricPair,
    n: usize,
    c: &BigRational,
) -> Result<BigRational, ExactError> {
    conditional_tail_mean_of(&spectrum(pair, n)?, c)
}

/// Outcome of the exhaustive ball-is-smallest check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    Holds,
    /// A set `A` (indices into the enumeration of `X^n`) with conditional
    /// distortion at most that of the ball of the given scaled radius, yet
    /// strictly more probable.
    Violation {
        subset: Vec<usize>,
        radius: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub strings: usize,
    pub subsets_checked: u64,
    /// `(scaled radius, ball size)` for each distinct ball around `0^n`.
    pub balls: Vec<(u64, usize)>,
    pub verdict: OracleVerdict,
}

/// Largest `|X|^n` the exhaustive oracle accepts.
pub const ORACLE_MAX_STRINGS: usize = 20;

/// Checks, over every nonempty `A ⊆ X^n` and every ball `B` around `0^n`,
/// that `E[d | A] ≤ E[d | B]` implies `P(A) ≤ P(B)`.
pub fn ball_smallest_oracle(pair: &SymmetricPair, n: usize) -> Result<OracleReport, ExactError> {
    if n == 0 {
        return Err(ExactError::ZeroBlocklength);
    }
    let k = pair.size();
    let strings = (k as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    if strings > ORACLE_MAX_STRINGS as u64 {
        return Err(ExactError::BudgetExceeded {
            needed: strings,
            budget: ORACLE_MAX_STRINGS as u64,
        });
    }
    let strings = strings as usize;
    let center = vec![0usize; n];
    let dist: Vec<u64> = (0..strings)
        .map(|mut idx| {
            let x: Vec<usize> = (0..n)
                .map(|_| {
                    let s = idx % k;
                    idx /= k;
                    s
                })
                .collect();
            block_distortion_scaled(&x, &center, pair).expect("in range")
        })
        .collect();

    let mut radii: Vec<u64> = dist.clone();
    radii.sort_unstable();
    radii.dedup();
    // (radius, |B|, Σ_B T)
    let balls: Vec<(u64, u64, u64)> = radii
        .iter()
        .map(|&r| {
            let members = dist.iter().filter(|&&t| t <= r);
            (r, members.clone().count() as u64, members.sum())
        })
        .collect();

    let mut sums = vec![0u64; 1 << strings];
    for mask in 1usize..(1 << strings) {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + dist[low];
        let size = mask.count_ones() as u64;
        for &(r, b_size, b_sum) in &balls {
            // E[d|A] ≤ E[d|B] ⇔ ΣA·|B| ≤ ΣB·|A|
            let no_worse = sums[mask] as u128 * b_size as u128 <= b_sum as u128 * size as u128;
            if no_worse && size > b_size {
                let subset = (0..strings).filter(|i| mask >> i & 1 == 1).collect();
                return Ok(OracleReport {
                    strings,
                    subsets_checked: mask as u64,
                    balls: balls.iter().map(|b| (b.0, b.1 as usize)).collect(),
                    verdict: OracleVerdict::Violation { subset, radius: r },
                });
            }
        }
    }
    Ok(OracleReport {
        strings,
        subsets_checked: (1u64 << strings) - 1,
        balls: balls.iter().map(|b| (b.0, b.1 as usize)).collect(),
        verdict: OracleVerdict::Holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn binary_single_letter() {
        let s = spectrum(&SymmetricPair::hamming(2), 1).unwrap();
        assert_eq!(s.pmf(0), r(1, 2));
        assert_eq!(s.pmf(1), r(1, 2));
    }

    #[test]
    fn binary_n4_is_binomial() {
        let s = spectrum(&SymmetricPair::hamming(2), 4).unwrap();
        let want = [1, 4, 6, 4, 1];
        for (t, w) in want.iter().enumerate() {
            assert_eq!(s.pmf(t), r(*w, 16));
        }
    }

    #[test]
    fn ternary_n2_by_enumeration() {
        let s = spectrum(&SymmetricPair::hamming(3), 2).unwrap();
        assert_eq!(s.pmf(0), r(1, 9));
        assert_eq!(s.pmf(1), r(4, 9));
        assert_eq!(s.pmf(2), r(4, 9));
    }

    #[test]
    fn ball_examples() {
        let bin = SymmetricPair::hamming(2);
        let b = ball_probability(&bin, 4, &r(1, 4), BallMode::Exact).unwrap();
        assert_eq!(b.prob, Some(r(5, 16)));
        assert!((b.log_prob - (5.0f64 / 16.0).ln()).abs() < 1e-14);
        let ter = SymmetricPair::hamming(3);
        let b = ball_probability(&ter, 2, &r(1, 2), BallMode::Exact).unwrap();
        assert_eq!(b.prob, Some(r(5, 9)));
        let whole = ball_probability(&ter, 5, &r(1, 1), BallMode::Exact).unwrap();
        assert_eq!(whole.prob, Some(r(1, 1)));
        assert!(matches!(
            ball_probability(&ter, 2, &r(-1, 2), BallMode::Exact),
            Err(ExactError::NegativeRadius)
        ));
    }

    #[test]
    fn log_mode_agrees_with_exact() {
        let pair = SymmetricPair::hamming(3);
        for n in [5, 40, 200] {
            let e = ball_probability(&pair, n, &r(1, 3), BallMode::Exact).unwrap();
            let l = ball_probability(&pair, n, &r(1, 3), BallMode::Log).unwrap();
            assert!(l.approx && !e.approx);
            assert!((e.log_prob - l.log_prob).abs() <= 1e-9 * n as f64);
        }
    }

    #[test]
    fn auto_mode_falls_back_above_budget() {
        let pair = SymmetricPair::hamming(2);
        let tiny = ExactBudget { max_bits: 10 };
        let b = ball_probability_with_budget(&pair, 50, &r(1, 4), BallMode::Auto, &tiny).unwrap();
        assert!(b.approx && b.prob.is_none());
        assert!(matches!(
            ball_probability_with_budget(&pair, 50, &r(1, 4), BallMode::Exact, &tiny),
            Err(ExactError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn tail_mean_examples() {
        let bin = SymmetricPair::hamming(2);
        assert_eq!(conditional_tail_mean(&bin, 2, &r(-1, 2)).unwrap(), r(-1, 3));
        assert_eq!(conditional_tail_mean(&bin, 3, &r(-1, 1)).unwrap(), r(-1, 2));
        assert_eq!(conditional_tail_mean(&bin, 3, &r(0, 1)).unwrap(), r(0, 1));
        assert_eq!(
            conditional_tail_mean(&bin, 3, &r(1, 10)),
            Err(ExactError::EmptyEvent)
        );
    }

    #[test]
    fn oracle_small_instances() {
        let bin = ball_smallest_oracle(&SymmetricPair::hamming(2), 3).unwrap();
        assert_eq!(bin.verdict, OracleVerdict::Holds);
        assert_eq!(bin.subsets_checked, 255);
        assert_eq!(bin.balls, vec![(0, 1), (1, 4), (2, 7), (3, 8)]);
        let ter = ball_smallest_oracle(&SymmetricPair::hamming(3), 2).unwrap();
        assert_eq!(ter.verdict, OracleVerdict::Holds);
        assert_eq!(ter.subsets_checked, 511);
        assert!(matches!(
            ball_smallest_oracle(&SymmetricPair::hamming(3), 3),
            Err(ExactError::BudgetExceeded { .. })
        ));
    }
}
