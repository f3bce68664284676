//! Finite-blocklength lower bound on the rate of d-semifaithful codes.
//!
//! The bound assembles the curvature certificate of `R_I` at `D`, an
//! admissible `ε`, and the suprema `C*_ε`, `M_upper_ε` of the
//! large-deviation constants over the tilts whose means lie in
//! `[ε/2, D* - ε/2]`:
//!
//! `R ≥ R_I(D) + log n / (2n) - log M_upper_ε / n - |R_I'(D)|·C*_ε / n`.
//!
//! Two terms of the full argument are dropped because they are nonnegative
//! whenever `ε < H/(1 + |R_I'(D)|)` and `log n / (2n) < ε`. The slope term
//! is taken with the conservative sign. When `n` is too small for the
//! argument to apply, the bound falls back to `R ≥ R_I(D)` and says so.

use thiserror::Error;

use crate::ldbounds::{epsilon_constants, epsilon_limit, EpsilonConstants, LdError};
use crate::model::SymmetricPair;
use crate::rdsolve::{CurvatureCertificate, RdError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConverseError {
    #[error(transparent)]
    Rd(#[from] RdError),
    #[error(transparent)]
    Ld(#[from] LdError),
}

/// Everything about `(pair, D, ε)` that the bound needs, fixed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverseConfig {
    pub distortion: f64,
    pub epsilon: f64,
    pub certificate: CurvatureCertificate,
    pub constants: EpsilonConstants,
}

impl ConverseConfig {
    /// Uses `D1 = D/2`, `D2 = (D + D*)/2` and, unless given, `ε` at 0.9 of
    /// the admissible limit.
    pub fn new(pair: &SymmetricPair, d: f64, epsilon: Option<f64>) -> Result<Self, ConverseError> {
        let certificate = CurvatureCertificate::with_defaults(pair, d)?;
        Self::with_certificate(pair, certificate, epsilon)
    }

    pub fn with_certificate(
        pair: &SymmetricPair,
        certificate: CurvatureCertificate,
        epsilon: Option<f64>,
    ) -> Result<Self, ConverseError> {
        let epsilon = epsilon.unwrap_or_else(|| 0.9 * epsilon_limit(pair, &certificate));
        let constants = epsilon_constants(pair, epsilon, &certificate)?;
        Ok(Self {
            distortion: certificate.distortion,
            epsilon,
            certificate,
            constants,
        })
    }

    pub fn rate(&self) -> f64 {
        self.certificate.rate
    }

    pub fn slope(&self) -> f64 {
        self.certificate.slope
    }

    /// `n·(lower - R_I - log n/(2n))`, the same for every nontrivial `n`.
    pub fn residual_numerator(&self) -> f64 {
        -self.constants.m_upper_eps.ln() - self.slope().abs() * self.constants.c_star_eps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precondition {
    /// `log n / (2n) < ε`.
    HalfLogBelowEpsilon,
    /// `ε + C*_ε / n < D1`.
    RadiusBelowD1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    /// `R_I(D)`.
    pub base: f64,
    /// `log n / (2n)`.
    pub half_log: f64,
    /// `-(log M_upper_ε)/n - |R_I'(D)|·C*_ε/n`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConverseBound {
    pub n: u64,
    /// Lower bound on the rate in nats per symbol.
    pub lower_rate_nats: f64,
    /// The terms of the nontrivial bound, reported even when it is not used.
    pub decomposition: Decomposition,
    /// True when the bound fell back to `R_I(D)`.
    pub trivial: bool,
    /// Preconditions that failed at this `n`.
    pub unmet: Vec<Precondition>,
}

pub fn finite_n_lower_bound(config: &ConverseConfig, n: u64) -> ConverseBound {
    assert!(n >= 1, "blocklength must be at least 1");
    let nf = n as f64;
    let decomposition = Decomposition {
        base: config.rate(),
        half_log: nf.ln() / (2.0 * nf),
        residual: config.residual_numerator() / nf,
    };
    let mut unmet = Vec::new();
    if decomposition.half_log >= config.epsilon {
        unmet.push(Precondition::HalfLogBelowEpsilon);
    }
    if replacement_radius(config.epsilon, config.constants.c_star_eps, n).imath
        >= config.certificate.d1
    {
        unmet.push(Precondition::RadiusBelowD1);
    }
    let trivial = !unmet.is_empty();
    let full = decomposition.base + decomposition.half_log + decomposition.residual;
    // The fallback R_I(D) is always valid; never report less.
    let lower_rate_nats = if trivial {
        decomposition.base
    } else {
        full.max(decomposition.base)
    };
    ConverseBound {
        n,
        lower_rate_nats,
        decomposition,
        trivial,
        unmet,
    }
}

/// Smallest `n` from which on both preconditions hold, as a float since it
/// can exceed 64 bits.
pub fn min_nontrivial_n(config: &ConverseConfig) -> f64 {
    let gap = config.certificate.d1 - config.epsilon;
    let radius_n = (config.constants.c_star_eps / gap).floor() + 1.0;
    // log n / (2n) decreases for n ≥ 3; find where it drops below ε.
    let below = |n: f64| n.ln() / (2.0 * n) < config.epsilon;
    let mut hi = 3.0f64;
    while !below(hi) {
        hi *= 2.0;
    }
    let mut lo = (hi / 2.0).max(2.0);
    while hi - lo > 1.0 {
        let mid = ((lo + hi) / 2.0).floor();
        if below(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    radius_n.max(hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplacementRadius {
    pub s: f64,
    /// `s + C*_ε / n`.
    pub imath: f64,
}

pub fn replacement_radius(s: f64, c_star_eps: f64, n: u64) -> ReplacementRadius {
    assert!(s >= 0.0, "radius must be non-negative");
    ReplacementRadius {
        s,
        imath: s + c_star_eps / n as f64,
    }
}
