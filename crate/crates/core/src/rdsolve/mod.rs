//! The rate-distortion function of a symmetric pair.
//!
//! For a symmetric pair the optimal test channel is the tilted channel
//! `W*(y|x) ∝ exp(-λ* d(x, y))` whose mean distortion is the target `D`.
//! [`solve_lambda_star`] finds `λ*` by bisection (the tilted mean is strictly
//! decreasing), and [`rate_distortion`] evaluates `R_I(D)` as the mutual
//! information of `W*` under the uniform source. The slope is `R_I'(D) = -λ*`.
//!
//! [`blahut_arimoto`] is an independent solver for arbitrary finite pairs; it
//! is used as an oracle for the symmetric case and as the only solver for
//! non-symmetric matrices.

mod blahut_arimoto;
mod curvature;

pub use blahut_arimoto::{
    blahut_arimoto, blahut_arimoto_at_distortion, blahut_arimoto_budgeted, cutoff_distortion,
    BaOptions, BaPoint,
};
pub use curvature::{curvature_certificate, supporting_line_gap, CurvatureCertificate};

use std::collections::HashMap;
use std::sync::Mutex;

use thiserror::Error;

use crate::model::{tilted_channel, tilted_mean, SymmetricPair, LAMBDA_CAP};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RdError {
    #[error("distortion {d} is outside (0, {d_star})")]
    OutOfRange { d: f64, d_star: f64 },
    #[error("need 0 < D1 < D < D2 < D*, got D1 = {d1}, D = {d}, D2 = {d2}, D* = {d_star}")]
    BadOrdering {
        d1: f64,
        d: f64,
        d2: f64,
        d_star: f64,
    },
    #[error("curvature gap {gap} is not positive")]
    NotCurved { gap: f64 },
    #[error("supporting-line gap {gap} at {d_hat} is below the curvature gap {h}")]
    BelowCurvatureGap { d_hat: f64, gap: f64, h: f64 },
    #[error("Blahut-Arimoto did not converge in {iterations} iterations (gap {gap:e})")]
    NonConvergence { iterations: usize, gap: f64 },
    #[error("invalid Blahut-Arimoto input: {0}")]
    BadInput(String),
}

/// One point of the rate-distortion curve, in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdPoint {
    pub distortion: f64,
    pub lambda_star: f64,
    pub rate: f64,
    /// `R_I'(D) = -λ*`.
    pub slope: f64,
}

fn check_range(pair: &SymmetricPair, d: f64) -> Result<(), RdError> {
    let d_star = pair.d_star_f64();
    if d > 0.0 && d < d_star {
        Ok(())
    } else {
        Err(RdError::OutOfRange { d, d_star })
    }
}

/// Tilt whose mean distortion equals `d`, for `0 < d < D*`.
pub fn solve_lambda_star(pair: &SymmetricPair, d: f64) -> Result<f64, RdError> {
    check_range(pair, d)?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while tilted_mean(pair, hi) > d {
        lo = hi;
        if hi >= LAMBDA_CAP {
            return Ok(LAMBDA_CAP);
        }
        hi = (hi * 2.0).min(LAMBDA_CAP);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if tilted_mean(pair, mid) > d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let err = |l: f64| (tilted_mean(pair, l) - d).abs();
    Ok(if err(lo) <= err(hi) { lo } else { hi })
}

pub fn rate_distortion(pair: &SymmetricPair, d: f64) -> Result<RdPoint, RdError> {
    let lambda_star = solve_lambda_star(pair, d)?;
    let rate = tilted_channel(pair, lambda_star)
        .mutual_information()
        .max(0.0);
    Ok(RdPoint {
        distortion: d,
        lambda_star,
        rate,
        slope: -lambda_star,
    })
}

/// `R_I(d)` on the closed range `(0, ∞)`: zero from `D*` on.
pub fn rate_or_zero(pair: &SymmetricPair, d: f64) -> Result<f64, RdError> {
    if d >= pair.d_star_f64() {
        return Ok(0.0);
    }
    rate_distortion(pair, d).map(|p| p.rate)
}

/// Memoized rate-distortion evaluations for one pair.
///
/// Keys are distortions rounded to a 1e-12 grid. The cache is behind a mutex
/// so a curve can be shared across worker threads.
pub struct RdCurve<'a> {
    pair: &'a SymmetricPair,
    cache: Mutex<HashMap<i64, RdPoint>>,
}

impl<'a> RdCurve<'a> {
    pub fn new(pair: &'a SymmetricPair) -> Self {
        Self {
            pair,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn pair(&self) -> &SymmetricPair {
        self.pair
    }

    pub fn point(&self, d: f64) -> Result<RdPoint, RdError> {
        let key = (d * 1e12).round() as i64;
        if let Some(p) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(*p);
        }
        let p = rate_distortion(self.pair, d)?;
        self.cache.lock().expect("cache poisoned").insert(key, p);
        Ok(p)
    }

    pub fn rate(&self, d: f64) -> Result<f64, RdError> {
        if d >= self.pair.d_star_f64() {
            return Ok(0.0);
        }
        self.point(d).map(|p| p.rate)
    }

    pub fn cached(&self) -> usize {
        self.cache.lock().expect("cache poisoned").len()
    }
}

/// `K` evenly spaced interior points of `(0, D*)`.
pub fn distortion_grid(pair: &SymmetricPair, points: usize) -> Vec<f64> {
    let d_star = pair.d_star_f64();
    (1..=points)
        .map(|i| d_star * i as f64 / (points + 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_entropy(p: f64) -> f64 {
        -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
    }

    #[test]
    fn lambda_star_closed_forms() {
        let bin = SymmetricPair::hamming(2);
        assert!((solve_lambda_star(&bin, 0.25).unwrap() - 3f64.ln()).abs() < 1e-12);
        let l = solve_lambda_star(&bin, 0.5 - 1e-9).unwrap();
        assert!((l - 4e-9).abs() < 1e-12, "{l}");
        let ter = SymmetricPair::hamming(3);
        assert!((solve_lambda_star(&ter, 1.0 / 3.0).unwrap() - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn lambda_star_hits_target_mean() {
        let pair = SymmetricPair::hamming(4);
        for d in distortion_grid(&pair, 25) {
            let l = solve_lambda_star(&pair, d).unwrap();
            assert!((tilted_mean(&pair, l) - d).abs() <= 1e-12 * d);
        }
    }

    #[test]
    fn out_of_range_targets() {
        let bin = SymmetricPair::hamming(2);
        for d in [0.0, -0.1, 0.5, 0.7] {
            assert!(matches!(
                solve_lambda_star(&bin, d),
                Err(RdError::OutOfRange { .. })
            ));
            assert!(rate_distortion(&bin, d).is_err());
        }
    }

    #[test]
    fn rate_closed_forms() {
        let bin = SymmetricPair::hamming(2);
        let p = rate_distortion(&bin, 0.25).unwrap();
        assert!((p.rate - (2f64.ln() - binary_entropy(0.25))).abs() < 1e-14);
        assert!((p.rate - 0.130812).abs() < 1e-6);
        assert!((p.slope + 3f64.ln()).abs() < 1e-12);

        let d: f64 = 1.0 / 3.0;
        let t = rate_distortion(&SymmetricPair::hamming(3), d).unwrap();
        assert!((t.rate - (3f64.ln() - binary_entropy(d) - d * 2f64.ln())).abs() < 1e-14);
        assert!((t.rate - 0.231049).abs() < 1e-6);

        let near = rate_distortion(&bin, 0.5 - 1e-7).unwrap();
        assert!(near.rate < 1e-12);
    }

    #[test]
    fn memoized_curve() {
        let pair = SymmetricPair::hamming(2);
        let curve = RdCurve::new(&pair);
        let a = curve.point(0.25).unwrap();
        let b = curve.point(0.25 + 1e-14).unwrap();
        assert_eq!(a, b);
        assert_eq!(curve.cached(), 1);
        assert_eq!(curve.rate(0.6).unwrap(), 0.0);
    }
}
