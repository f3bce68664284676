//! Curvature of `R_I` about a target distortion.
//!
//! A certificate records two flanking points `D1 < D < D2` and the smallest
//! excess `H` of `R_I` over its tangent line at `D`, taken at those points.
//! Any distortion outside `[D1, D2]` then sits at least `H` above the tangent.

use super::{rate_distortion, rate_or_zero, RdError};
use crate::model::SymmetricPair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureCertificate {
    pub distortion: f64,
    pub d1: f64,
    pub d2: f64,
    /// Curvature gap `H > 0`.
    pub h: f64,
    pub rate: f64,
    pub slope: f64,
}

impl CurvatureCertificate {
    /// Height of `R_I(x)` above the tangent at the certified distortion.
    fn excess(&self, rate_x: f64, x: f64) -> f64 {
        rate_x - self.rate - self.slope * (x - self.distortion)
    }

    /// Certificate with `D1 = D/2` and `D2 = (D + D*)/2`.
    pub fn with_defaults(pair: &SymmetricPair, d: f64) -> Result<Self, RdError> {
        curvature_certificate(pair, d, d / 2.0, (d + pair.d_star_f64()) / 2.0)
    }
}

pub fn curvature_certificate(
    pair: &SymmetricPair,
    d: f64,
    d1: f64,
    d2: f64,
) -> Result<CurvatureCertificate, RdError> {
    let d_star = pair.d_star_f64();
    if !(0.0 < d1 && d1 < d && d < d2 && d2 < d_star) {
        return Err(RdError::BadOrdering { d1, d, d2, d_star });
    }
    let at = rate_distortion(pair, d)?;
    let mut cert = CurvatureCertificate {
        distortion: d,
        d1,
        d2,
        h: 0.0,
        rate: at.rate,
        slope: at.slope,
    };
    let g1 = cert.excess(rate_distortion(pair, d1)?.rate, d1);
    let g2 = cert.excess(rate_distortion(pair, d2)?.rate, d2);
    cert.h = g1.min(g2);
    if cert.h <= 0.0 {
        return Err(RdError::NotCurved { gap: cert.h });
    }
    Ok(cert)
}

/// Excess of `R_I(d_hat)` over the tangent at the certified distortion, for
/// `d_hat` in `(0, D1] ∪ [D2, D*]`. Fails if the excess is below `H`.
pub fn supporting_line_gap(
    pair: &SymmetricPair,
    cert: &CurvatureCertificate,
    d_hat: f64,
) -> Result<f64, RdError> {
    let d_star = pair.d_star_f64();
    if !(d_hat > 0.0 && d_hat <= d_star) || (d_hat > cert.d1 && d_hat < cert.d2) {
        return Err(RdError::OutOfRange { d: d_hat, d_star });
    }
    let gap = cert.excess(rate_or_zero(pair, d_hat)?, d_hat);
    // Equality is attained at D1 or D2; allow rounding there.
    if gap < cert.h - 1e-12 {
        return Err(RdError::BelowCurvatureGap {
            d_hat,
            gap,
            h: cert.h,
        });
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rb(d: f64) -> f64 {
        2f64.ln() + d * d.ln() + (1.0 - d) * (1.0 - d).ln()
    }

    #[test]
    fn binary_certificate_matches_closed_form() {
        let pair = SymmetricPair::hamming(2);
        let cert = curvature_certificate(&pair, 0.25, 0.125, 0.375).unwrap();
        let tangent = |x: f64| rb(0.25) - 3f64.ln() * (x - 0.25);
        let want = (rb(0.125) - tangent(0.125)).min(rb(0.375) - tangent(0.375));
        assert!((cert.h - want).abs() < 1e-12);
        assert!(cert.h > 0.0);
    }

    #[test]
    fn rejects_degenerate_flanks() {
        let pair = SymmetricPair::hamming(2);
        assert!(matches!(
            curvature_certificate(&pair, 0.25, 0.25, 0.25),
            Err(RdError::BadOrdering { .. })
        ));
    }

    #[test]
    fn ternary_defaults_are_curved() {
        let pair = SymmetricPair::hamming(3);
        assert!(
            CurvatureCertificate::with_defaults(&pair, 1.0 / 3.0)
                .unwrap()
                .h
                > 0.0
        );
    }

    #[test]
    fn gaps_outside_the_flanks() {
        let pair = SymmetricPair::hamming(2);
        let cert = CurvatureCertificate::with_defaults(&pair, 0.25).unwrap();
        assert!(supporting_line_gap(&pair, &cert, 0.05).unwrap() >= cert.h);
        let at_cutoff = supporting_line_gap(&pair, &cert, 0.5).unwrap();
        assert!((at_cutoff - (-cert.rate - cert.slope * 0.25)).abs() < 1e-15);
        assert!(at_cutoff >= cert.h);
        let at_d1 = supporting_line_gap(&pair, &cert, cert.d1).unwrap();
        assert!(at_d1 >= cert.h - 1e-12);
        assert!(matches!(
            supporting_line_gap(&pair, &cert, 0.3),
            Err(RdError::OutOfRange { .. })
        ));
    }
}
