//! Cumulants, rate functions and the explicit large-deviation constants.
//!
//! The per-letter variable is `Z = -d(X, y)` with `X` uniform, so the ball
//! event `d(x^n, Y^n) ≤ D` is the upper tail `S_n ≥ c` of the mean `S_n` of
//! i.i.d. copies of `Z`, at level `c = -D`. [`tail_level`] is the one place
//! where that sign flip happens; everything else here speaks in distortions.
//!
//! Constants follow the Bahadur–Rao style sandwich with the choice `a = 2`:
//! with per-letter tilted variance `v` and third absolute central moment
//! `μ3` at tilt `η`, and `t = 2√(2π)·η·μ3/v`,
//!
//! * `M_lower = e^{-2t}(1 + 2t) / (4η√(2πv))`, valid once
//!   `((1+2t)² + 1) / ((1+2t)·η·√e·√(nv)) ≤ 1/2`, i.e. for `n ≥ n0`;
//! * `M_upper = 1/√(2πv) + 2μ3/v^{3/2}`;
//! * `C* = 1 / (M_lower·η²·e^{-2η·D_max}·σ²)`.

use std::f64::consts::{E, PI};

use thiserror::Error;

use crate::model::{tilted_letter, tilted_mean, SymmetricPair, LAMBDA_CAP};
use crate::rdsolve::{solve_lambda_star, CurvatureCertificate, RdError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LdError {
    #[error(transparent)]
    Rd(#[from] RdError),
    #[error("epsilon {epsilon} must lie in (0, {limit})")]
    EpsilonTooLarge { epsilon: f64, limit: f64 },
    #[error("blocklength must be at least 1")]
    ZeroBlocklength,
}

/// Tail level `c = -D` of the mean of `Z = -d`.
pub fn tail_level(d: f64) -> f64 {
    -d
}

/// `Λ(λ) = log E[exp(-λ d(X, y))]` with `X` uniform; the same for every `y`.
pub fn cumulant(pair: &SymmetricPair, lambda: f64) -> f64 {
    assert!(lambda >= 0.0, "tilt must be non-negative, got {lambda}");
    let values = pair.letter_values();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values
        .iter()
        .map(|v| (-lambda * (v - lo)).exp())
        .sum::<f64>()
        / values.len() as f64;
    -lambda * lo + mean.ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFunctionEval {
    /// Tail level `c = -D`.
    pub c: f64,
    pub eta_star: f64,
    /// `Λ(η*)`.
    pub lambda: f64,
    /// `Λ*(c) = η*·c - Λ(η*)`.
    pub lambda_star: f64,
}

/// Legendre transform of the cumulant at `c = -D`, at its maximizing tilt.
pub fn rate_function(pair: &SymmetricPair, d: f64) -> Result<RateFunctionEval, LdError> {
    let eta_star = solve_lambda_star(pair, d)?;
    let c = tail_level(d);
    let lambda = cumulant(pair, eta_star);
    Ok(RateFunctionEval {
        c,
        eta_star,
        lambda,
        lambda_star: eta_star * c - lambda,
    })
}

/// Tilted moments of the block sum; each is `n` times the per-letter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedMoments {
    pub eta_star: f64,
    pub n: usize,
    pub s_n2: f64,
    pub mu3_n: f64,
}

pub fn tilted_moments(pair: &SymmetricPair, eta: f64, n: usize) -> TiltedMoments {
    let l = tilted_letter(pair, eta);
    TiltedMoments {
        eta_star: eta,
        n,
        s_n2: n as f64 * l.variance,
        mu3_n: n as f64 * l.abs_third,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichConstants {
    pub eta: f64,
    /// `t = 2√(2π)·η·μ3/v`.
    pub t: f64,
    pub m_lower: f64,
    pub m_upper: f64,
    /// First blocklength at which the lower bound is valid.
    pub n0: u64,
    pub c_star: f64,
}

impl SandwichConstants {
    /// Constants evaluated at an arbitrary tilt `η > 0`.
    pub fn at_tilt(pair: &SymmetricPair, eta: f64) -> Self {
        let l = tilted_letter(pair, eta);
        let (v, mu3) = (l.variance, l.abs_third);
        let t = 2.0 * (2.0 * PI).sqrt() * eta * mu3 / v;
        let m_lower = (-2.0 * t).exp() * (1.0 + 2.0 * t) / (4.0 * eta * (2.0 * PI * v).sqrt());
        let m_upper = 1.0 / (2.0 * PI * v).sqrt() + 2.0 * mu3 / v.powf(1.5);
        // Residual factor A/√(n v) ≤ 1/2  ⇔  n ≥ 4A²/v.
        let a = ((1.0 + 2.0 * t).powi(2) + 1.0) / ((1.0 + 2.0 * t) * eta * E.sqrt());
        let n0 = (4.0 * a * a / v).ceil().max(1.0);
        let n0 = if n0 < u64::MAX as f64 {
            n0 as u64
        } else {
            u64::MAX
        };
        let c_star =
            1.0 / (m_lower * eta * eta * (-2.0 * eta * pair.d_max_f64()).exp() * pair.sigma2_f64());
        Self {
            eta,
            t,
            m_lower,
            m_upper,
            n0,
            c_star,
        }
    }
}

pub fn sandwich_constants(pair: &SymmetricPair, d: f64) -> Result<SandwichConstants, LdError> {
    Ok(SandwichConstants::at_tilt(
        pair,
        solve_lambda_star(pair, d)?,
    ))
}

/// Bounds on `Pr(d(x^n, Y^n) ≤ D)`, kept in the log domain since
/// `exp(-nΛ*)` underflows for moderate `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    pub n: usize,
    pub rate: RateFunctionEval,
    pub constants: SandwichConstants,
    /// `None` below `n0`, where the lower bound is not established.
    pub log_lower: Option<f64>,
    pub log_upper: f64,
}

impl Sandwich {
    pub fn lower(&self) -> Option<f64> {
        self.log_lower.map(f64::exp)
    }

    pub fn upper(&self) -> f64 {
        self.log_upper.exp()
    }

    pub fn contains_log(&self, log_p: f64) -> bool {
        self.log_lower.is_none_or(|lo| lo <= log_p) && log_p <= self.log_upper
    }
}

pub fn sandwich(pair: &SymmetricPair, n: usize, d: f64) -> Result<Sandwich, LdError> {
    if n == 0 {
        return Err(LdError::ZeroBlocklength);
    }
    let rate = rate_function(pair, d)?;
    let constants = SandwichConstants::at_tilt(pair, rate.eta_star);
    let base = -(n as f64) * rate.lambda_star - 0.5 * (n as f64).ln();
    let log_lower = (n as u64 >= constants.n0).then(|| base + constants.m_lower.ln());
    Ok(Sandwich {
        n,
        rate,
        constants,
        log_lower,
        log_upper: base + constants.m_upper.ln(),
    })
}

/// `C*` such that `E[S_n | S_n ≥ -D] ≤ -D + C*/n` for `n ≥ n0`.
pub fn gibbs_constant(pair: &SymmetricPair, d: f64) -> Result<f64, LdError> {
    Ok(sandwich_constants(pair, d)?.c_star)
}

/// Tilts at which the tilted mean crosses `D* - ε/2` and `ε/2`.
///
/// `low` is the smaller tilt (mean `D* - ε/2`) and `high` the larger one
/// (mean `ε/2`); the tilted mean is decreasing, so `low ≤ high`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltingThresholds {
    pub epsilon: f64,
    pub low: f64,
    pub high: f64,
}

fn tilt_for_mean(pair: &SymmetricPair, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while tilted_mean(pair, hi) > target && hi < LAMBDA_CAP {
        lo = hi;
        hi = (2.0 * hi).min(LAMBDA_CAP);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if tilted_mean(pair, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

pub fn tilting_thresholds(
    pair: &SymmetricPair,
    epsilon: f64,
) -> Result<TiltingThresholds, LdError> {
    let d_star = pair.d_star_f64();
    if !(epsilon > 0.0 && epsilon < d_star) {
        return Err(LdError::EpsilonTooLarge {
            epsilon,
            limit: d_star,
        });
    }
    Ok(TiltingThresholds {
        epsilon,
        low: tilt_for_mean(pair, d_star - epsilon / 2.0),
        high: tilt_for_mean(pair, epsilon / 2.0),
    })
}

/// Upper end of the admissible `ε` window: `min(D1, D* - D2, H/(1 + |R'|))`.
pub fn epsilon_limit(pair: &SymmetricPair, cert: &CurvatureCertificate) -> f64 {
    cert.d1
        .min(pair.d_star_f64() - cert.d2)
        .min(cert.h / (1.0 + cert.slope.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonConstants {
    pub thresholds: TiltingThresholds,
    /// Supremum of `C*(λ)` over the threshold interval.
    pub c_star_eps: f64,
    /// Supremum of `M_upper(λ)` over the threshold interval.
    pub m_upper_eps: f64,
    pub grid_points: usize,
}

/// Default resolution of the supremum grid.
pub const EPSILON_GRID: usize = 1024;

pub fn epsilon_constants(
    pair: &SymmetricPair,
    epsilon: f64,
    cert: &CurvatureCertificate,
) -> Result<EpsilonConstants, LdError> {
    epsilon_constants_with_grid(pair, epsilon, cert, EPSILON_GRID)
}

/// Suprema on a uniform grid of `points` tilts, each refined by a finer grid
/// over the two cells around the best grid point.
pub fn epsilon_constants_with_grid(
    pair: &SymmetricPair,
    epsilon: f64,
    cert: &CurvatureCertificate,
    points: usize,
) -> Result<EpsilonConstants, LdError> {
    let limit = epsilon_limit(pair, cert);
    if !(epsilon > 0.0 && epsilon < limit) {
        return Err(LdError::EpsilonTooLarge { epsilon, limit });
    }
    let thresholds = tilting_thresholds(pair, epsilon)?;
    let (a, b) = (thresholds.low, thresholds.high);
    let points = points.max(2);
    let c_star = |l: f64| SandwichConstants::at_tilt(pair, l).c_star;
    let m_upper = |l: f64| SandwichConstants::at_tilt(pair, l).m_upper;
    Ok(EpsilonConstants {
        thresholds,
        c_star_eps: grid_sup(c_star, a, b, points),
        m_upper_eps: grid_sup(m_upper, a, b, points),
        grid_points: points,
    })
}

fn grid_sup(f: impl Fn(f64) -> f64, a: f64, b: f64, points: usize) -> f64 {
    let step = (b - a) / (points - 1) as f64;
    let at = |i: usize| {
        if i + 1 == points {
            b
        } else {
            a + step * i as f64
        }
    };
    let (best_i, mut best) =
        (0..points)
            .map(|i| (i, f(at(i))))
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
    let lo = at(best_i.saturating_sub(1));
    let hi = at((best_i + 1).min(points - 1));
    let fine = 64;
    for j in 0..=fine {
        best = best.max(f(lo + (hi - lo) * j as f64 / fine as f64));
    }
    best
}
