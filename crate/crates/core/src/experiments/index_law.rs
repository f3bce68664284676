//! Goodness of fit of the empirical codebook index to its geometric law.
//!
//! For a fixed source block, rerunning the encoder with fresh codebook seeds
//! gives independent draws of the index `I`, which should be geometric with
//! the exact ball probability `p` whatever the block is.

use num_rational::BigRational;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::sweep::SweepError;
use crate::codec::{mix64, Codec, IndexDistribution, Scheme};
use crate::model::SymmetricPair;

/// Smallest expected count per bin.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareTest {
    fn new(statistic: f64, dof: usize) -> Self {
        let p_value = ChiSquared::new(dof as f64)
            .map(|c| c.sf(statistic))
            .unwrap_or(f64::NAN);
        Self {
            statistic,
            dof,
            p_value,
        }
    }

    pub fn passes(&self, level: f64) -> bool {
        self.p_value >= level
    }
}

/// `trials` encoder indices for block `x`, one fresh codebook per trial.
pub fn sample_indices(
    pair: &SymmetricPair,
    x: &[usize],
    radius: &BigRational,
    trials: u64,
    seed: u64,
) -> Result<Vec<u64>, SweepError> {
    let codec = Codec::new(pair, x.len(), radius.clone(), seed, Scheme::Golomb)?;
    (0..trials)
        .map(|t| Ok(codec.reseeded(mix64(seed ^ t)).search(x)?.0))
        .collect()
}

/// Bins `{1}, {2}, ..., {K-1}, [K, ∞)` with every expected count at least
/// five, for `trials` draws from `law`. Returns the bin starts.
fn bins(law: &IndexDistribution, trials: u64) -> Vec<u64> {
    let tr = trials as f64;
    let mut starts = vec![1u64];
    let mut k = 1u64;
    // Close a bin at k when both it and the remaining tail are large enough.
    while law.pmf(k) * tr >= MIN_EXPECTED && law.tail(k) * tr >= MIN_EXPECTED {
        k += 1;
        starts.push(k);
    }
    starts
}

fn bin_of(starts: &[u64], i: u64) -> usize {
    starts.partition_point(|&s| s <= i) - 1
}

fn bin_probabilities(law: &IndexDistribution, starts: &[u64]) -> Vec<f64> {
    let mut probs: Vec<f64> = starts[..starts.len() - 1]
        .iter()
        .map(|&k| law.pmf(k))
        .collect();
    probs.push(law.tail(starts[starts.len() - 1] - 1));
    probs
}

/// Pearson test of `samples` against `law`.
pub fn geometric_gof(samples: &[u64], law: &IndexDistribution) -> ChiSquareTest {
    let starts = bins(law, samples.len() as u64);
    let probs = bin_probabilities(law, &starts);
    let mut counts = vec![0u64; starts.len()];
    for &i in samples {
        counts[bin_of(&starts, i)] += 1;
    }
    let tr = samples.len() as f64;
    let stat = counts
        .iter()
        .zip(&probs)
        .map(|(&o, &p)| (o as f64 - tr * p).powi(2) / (tr * p))
        .sum();
    ChiSquareTest::new(stat, starts.len().saturating_sub(1).max(1))
}

/// Pearson homogeneity test of two samples on the bins of `law`.
pub fn two_sample(a: &[u64], b: &[u64], law: &IndexDistribution) -> ChiSquareTest {
    let starts = bins(law, a.len().min(b.len()) as u64);
    let mut ca = vec![0u64; starts.len()];
    let mut cb = vec![0u64; starts.len()];
    for &i in a {
        ca[bin_of(&starts, i)] += 1;
    }
    for &i in b {
        cb[bin_of(&starts, i)] += 1;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let total = na + nb;
    let mut stat = 0.0;
    for (&oa, &ob) in ca.iter().zip(&cb) {
        let col = (oa + ob) as f64;
        if col == 0.0 {
            continue;
        }
        for (o, rowsum) in [(oa, na), (ob, nb)] {
            let e = rowsum * col / total;
            stat += (o as f64 - e).powi(2) / e;
        }
    }
    ChiSquareTest::new(stat, starts.len().saturating_sub(1).max(1))
}
