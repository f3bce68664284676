//! Exponentially tilted channels and source distributions.
//!
//! Tilt parameters are in nats per unit of distortion and must be
//! non-negative. Anything above [`LAMBDA_CAP`] is clamped; there the tilted
//! mean is taken to be its limit, zero.

use super::SymmetricPair;

/// Largest tilt used by any numeric routine.
pub const LAMBDA_CAP: f64 = 1e6;

fn check_lambda(lambda: f64) -> f64 {
    assert!(
        lambda >= 0.0,
        "tilt must be non-negative and finite, got {lambda}"
    );
    lambda.min(LAMBDA_CAP)
}

/// Normalized weights `exp(-λ v) / Σ exp(-λ v)`.
fn gibbs_weights(values: impl Iterator<Item = f64> + Clone, lambda: f64) -> Vec<f64> {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = values.map(|v| (-lambda * (v - lo)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

/// `W(y|x) ∝ exp(-λ d(x, y))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedChannel {
    lambda: f64,
    conditional: Vec<Vec<f64>>,
}

impl TiltedChannel {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn conditional(&self) -> &[Vec<f64>] {
        &self.conditional
    }

    /// Output law induced by a uniform input.
    pub fn output_marginal(&self) -> Vec<f64> {
        let k = self.conditional.len() as f64;
        let mut out = vec![0.0; self.conditional[0].len()];
        for row in &self.conditional {
            for (o, w) in out.iter_mut().zip(row) {
                *o += w / k;
            }
        }
        out
    }

    /// `I(X; Y)` in nats under a uniform input.
    pub fn mutual_information(&self) -> f64 {
        let k = self.conditional.len() as f64;
        let marginal = self.output_marginal();
        self.conditional
            .iter()
            .flat_map(|row| row.iter().zip(&marginal))
            .filter(|(&w, _)| w > 0.0)
            .map(|(&w, &q)| w * (w / q).ln() / k)
            .sum()
    }
}

pub fn tilted_channel(pair: &SymmetricPair, lambda: f64) -> TiltedChannel {
    let lambda = check_lambda(lambda);
    let d = pair.matrix().to_f64();
    let conditional = d
        .iter()
        .map(|row| gibbs_weights(row.iter().copied(), lambda))
        .collect();
    TiltedChannel {
        lambda,
        conditional,
    }
}

/// The `λ`-tilted source law around a reconstruction symbol:
/// `Q(x) ∝ exp(-λ d(x, center))` relative to the uniform source.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedSourceDistribution {
    lambda: f64,
    center: usize,
    pmf: Vec<f64>,
    distortions: Vec<f64>,
}

impl TiltedSourceDistribution {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// `E_Q[d(X, center)]`.
    pub fn mean_distortion(&self) -> f64 {
        self.pmf
            .iter()
            .zip(&self.distortions)
            .map(|(p, d)| p * d)
            .sum()
    }
}

pub fn tilted_source(pair: &SymmetricPair, lambda: f64, center: usize) -> TiltedSourceDistribution {
    let lambda = check_lambda(lambda);
    let distortions: Vec<f64> = pair
        .matrix()
        .to_f64()
        .iter()
        .map(|row| row[center])
        .collect();
    let pmf = gibbs_weights(distortions.iter().copied(), lambda);
    TiltedSourceDistribution {
        lambda,
        center,
        pmf,
        distortions,
    }
}

/// Moments of the per-letter distortion under tilt `λ`.
///
/// By row/column symmetry these do not depend on the letter held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedLetter {
    pub lambda: f64,
    pub mean: f64,
    pub variance: f64,
    /// `E|d - mean|³`.
    pub abs_third: f64,
}

pub fn tilted_letter(pair: &SymmetricPair, lambda: f64) -> TiltedLetter {
    let lambda = check_lambda(lambda);
    let values = pair.letter_values();
    let w = gibbs_weights(values.iter().copied(), lambda);
    let mean: f64 = w.iter().zip(values).map(|(w, v)| w * v).sum();
    let (variance, abs_third) = w.iter().zip(values).fold((0.0, 0.0), |(m2, m3), (w, v)| {
        let c = (v - mean).abs();
        (m2 + w * c * c, m3 + w * c * c * c)
    });
    TiltedLetter {
        lambda,
        mean,
        variance,
        abs_third,
    }
}

/// Mean distortion under the `λ`-tilted law. Equals `D*` at `λ = 0`, strictly
/// decreasing, and tends to zero.
pub fn tilted_mean(pair: &SymmetricPair, lambda: f64) -> f64 {
    if lambda > LAMBDA_CAP {
        return 0.0;
    }
    tilted_letter(pair, lambda).mean
}
