//! Exact redundancy across blocklengths, with Monte Carlo roundtrips where
//! the codebook search is affordable.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::codec::{mix64, Codec, CodecError, IndexDistribution, Scheme};
use crate::converse::{finite_n_lower_bound, ConverseConfig, ConverseError};
use crate::exactdist::{ExactError, SpectrumBuilder};
use crate::model::SymmetricPair;
use crate::numeric::{floor_rational, rational_to_f64};
use num_traits::ToPrimitive;

/// Separates the per-trial codebook seed from the per-trial source stream.
const CODEBOOK_SALT: u64 = 0xC0DE_B00C;
use crate::rdsolve::{rate_distortion, RdError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error("blocklength grid must be nonempty and positive")]
    EmptyGrid,
    #[error(transparent)]
    Rd(#[from] RdError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Converse(#[from] ConverseError),
    #[error("roundtrip failed at n = {n}, trial {trial}: {reason}")]
    Roundtrip {
        n: usize,
        trial: u64,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    /// Monte Carlo roundtrips per blocklength.
    pub trials: u64,
    pub seed: u64,
    /// Roundtrips run only where `1/p` is at most this.
    pub mc_expected_index_limit: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            trials: 0,
            seed: 0,
            mc_expected_index_limit: 1e5,
        }
    }
}

/// One blocklength. Rates are in nats per symbol, lengths in bits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    /// Ball probability as a float; underflows to zero for large `n`.
    pub p_exact: f64,
    pub ln_p: f64,
    /// Entropy of the index law in nats.
    pub h_i_nats: f64,
    pub e_len_golomb_bits: f64,
    pub e_len_elias_bits: f64,
    pub r_i: f64,
    pub normalized_redundancy_golomb: f64,
    pub normalized_redundancy_elias: f64,
    pub converse_lower: f64,
    pub converse_trivial: bool,
    pub mc_trials: u64,
    pub mc_mean_index: Option<f64>,
    pub mc_mean_bits_golomb: Option<f64>,
    pub mc_max_distortion: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub distortion: f64,
    pub r_i: f64,
    pub rows: Vec<SweepRow>,
}

/// `(E[len]/n - R_I)·n/ln n` with the length in bits.
pub fn normalized_redundancy(bits: f64, n: usize, rate: f64) -> f64 {
    let nf = n as f64;
    (bits * std::f64::consts::LN_2 / nf - rate) * nf / nf.ln()
}

/// Summary of `trials` roundtrips of one code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundtripStats {
    pub trials: u64,
    pub mean_index: f64,
    pub mean_bits: f64,
    /// Largest `Q·n·d(x^n, y^n)` seen.
    pub max_distortion_scaled: u64,
}

/// Encodes and decodes `trials` uniform source blocks, each with its own
/// codebook seed, and fails on the first block whose decoded codeword differs
/// from the encoder's or lies outside the ball.
pub fn roundtrips(
    pair: &SymmetricPair,
    n: usize,
    radius: &BigRational,
    scheme: Scheme,
    trials: u64,
    seed: u64,
) -> Result<RoundtripStats, SweepError> {
    let base = Codec::new(pair, n, radius.clone(), seed, scheme)?;
    let scale = BigRational::from_integer((n as u64 * pair.scale()).into());
    let threshold = floor_rational(&(radius * scale))
        .to_u64()
        .unwrap_or(u64::MAX);
    let k = pair.size() as u64;
    let one = |t: u64| -> Result<(u64, u64, u64), SweepError> {
        let st = mix64(seed ^ t);
        let codec = base.reseeded(mix64(st ^ CODEBOOK_SALT));
        let x: Vec<usize> = (0..n as u64)
            .map(|j| (mix64(st ^ (j << 1 | 1)) % k) as usize)
            .collect();
        let e = codec.encode(&x)?;
        let fail = |reason: String| SweepError::Roundtrip {
            n,
            trial: t,
            reason,
        };
        let y = codec.decode(&e.bits)?;
        if y != e.codeword {
            return Err(fail("decoded codeword differs from the encoder's".into()));
        }
        let d: u64 = x
            .iter()
            .zip(&y)
            .map(|(&a, &b)| pair.matrix().scaled(a, b))
            .sum();
        if d != e.distortion_scaled || d > threshold {
            return Err(fail(format!("distortion {d} exceeds radius {threshold}")));
        }
        Ok((e.index, e.bits.len() as u64, d))
    };
    let (sum_i, sum_b, max_d) = (0..trials).into_par_iter().map(one).try_reduce(
        || (0, 0, 0),
        |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2.max(b.2))),
    )?;
    let tr = trials.max(1) as f64;
    Ok(RoundtripStats {
        trials,
        mean_index: sum_i as f64 / tr,
        mean_bits: sum_b as f64 / tr,
        max_distortion_scaled: max_d,
    })
}

/// Exact expected lengths and redundancies for each `n`, the converse lower
/// bound, and optional roundtrips.
pub fn redundancy_sweep(
    pair: &SymmetricPair,
    d: &BigRational,
    n_grid: &[usize],
    opts: &SweepOptions,
) -> Result<SweepReport, SweepError> {
    if n_grid.is_empty() || n_grid.contains(&0) {
        return Err(SweepError::EmptyGrid);
    }
    let d_f = rational_to_f64(d);
    let r_i = rate_distortion(pair, d_f)?.rate;
    let converse = ConverseConfig::new(pair, d_f, None)?;
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let mut builder = SpectrumBuilder::new(pair);
    let mut rows = Vec::with_capacity(grid.len());
    for &n in &grid {
        while builder.current().n() < n {
            builder.step();
        }
        let spec = builder.current();
        let law = IndexDistribution::from_exact(spec.ball_probability(spec.threshold(d)?));
        let golomb = law.expected_golomb_bits(&law.golomb_parameter());
        let elias = law.expected_elias_bits();
        let bound = finite_n_lower_bound(&converse, n as u64);
        let run_mc = opts.trials > 0 && -law.ln_p() <= opts.mc_expected_index_limit.ln();
        let mc = if run_mc {
            Some(roundtrips(
                pair,
                n,
                d,
                Scheme::Golomb,
                opts.trials,
                mix64(opts.seed ^ n as u64),
            )?)
        } else {
            None
        };
        let scale = (n as u64 * pair.scale()) as f64;
        rows.push(SweepRow {
            n,
            p_exact: law.p(),
            ln_p: law.ln_p(),
            h_i_nats: law.entropy_nats(),
            e_len_golomb_bits: golomb,
            e_len_elias_bits: elias,
            r_i,
            normalized_redundancy_golomb: normalized_redundancy(golomb, n, r_i),
            normalized_redundancy_elias: normalized_redundancy(elias, n, r_i),
            converse_lower: bound.lower_rate_nats,
            converse_trivial: bound.trivial,
            mc_trials: mc.map_or(0, |m| m.trials),
            mc_mean_index: mc.map(|m| m.mean_index),
            mc_mean_bits_golomb: mc.map(|m| m.mean_bits),
            mc_max_distortion: mc.map(|m| m.max_distortion_scaled as f64 / scale),
        });
    }
    Ok(SweepReport {
        distortion: d_f,
        r_i,
        rows,
    })
}
