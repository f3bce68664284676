//! Beating `log n / (2n)` on a straight-line segment of the RD curve.
//!
//! When `R(D)` is affine on `[D0, D*]` and the segment ends at the zero-rate
//! point, a mixture code does better than any single ball code: with
//! probability `θ` send a one-bit flag and let the decoder output the
//! constant string `y0^n` (distortion `D*`), otherwise flag and code at
//! `D0`. The expected distortion is `θD* + (1-θ)D0 = D`. With a generic
//! index code (Elias) for the non-flag branch the redundancy is about
//! `(1-θ)·log n/n`, below the `log n/(2n)` of a single ball code once
//! `θ ≥ 1/2`. Since the sub-pair here is symmetric, the shared-`p` Golomb
//! code also applies and halves the non-flag redundancy; both are reported.
//!
//! The instance is a general (non-symmetric) pair. The segment is located
//! and certified by a Blahut–Arimoto slope scan. The non-flag branch uses
//! the symmetric sub-pair obtained by deleting column `y0`, which must be a
//! [`SymmetricPair`] under a uniform source, so the ball code of this crate
//! applies.
//!
//! Membership in the flag set `S` follows the `θ`-quantile of
//! `d(x^n, y0^n)`, with randomization on the boundary shell so that
//! `Pr(S) = θ` exactly. When every string ties, as in the default instance,
//! membership is a `θ`-coin.
//!
//! At large `n` the codebook search is infeasible (the expected index is
//! astronomically large), so the non-flag branch then draws its code length
//! and its distortion from their exact laws instead of searching: the index
//! is `1 + floor(E/λ)` with `E ~ Exp(1)` and `λ = -ln(1-p)`, and the chosen
//! codeword is uniform on the ball, so its distortion follows the spectrum
//! restricted to the ball.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::codec::{
    elias_delta_length, elias_delta_length_bits, mix64, truncated_binary_layout, Codec, CodecError,
    IndexDistribution, Scheme,
};
use crate::exactdist::{spectrum, ExactError};
use crate::model::{DistortionMatrix, ModelError, SymmetricPair};
use crate::numeric::{ln1m_over, ln_biguint, rational_to_f64};
use crate::rdsolve::{
    blahut_arimoto, cutoff_distortion, rate_distortion, BaOptions, BaPoint, RdError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StraightLineError {
    #[error("no straight-line segment: largest distortion jump across slopes is {jump:e}")]
    SegmentNotLinear { jump: f64 },
    #[error("segment is not affine: deviation {deviation:e} exceeds {tolerance:e}")]
    SegmentNotAffine { deviation: f64, tolerance: f64 },
    #[error("segment ends at {end}, not at the zero-rate distortion {d_star}")]
    SegmentNotTerminal { end: f64, d_star: f64 },
    #[error("flag-set quantile is degenerate: {0}")]
    QuantileDegenerate(String),
    #[error("unsupported instance: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Rd(#[from] RdError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Debug, Clone, Copy)]
pub struct SlopeScanOptions {
    /// Steepest slope scanned.
    pub min_slope: f64,
    /// Shallowest slope scanned (negative).
    pub max_slope: f64,
    pub slopes: usize,
    /// Smallest distortion jump, after refinement, that counts as a segment.
    pub jump_tolerance: f64,
    /// Largest allowed deviation of curve points from the segment's line.
    pub line_tolerance: f64,
    /// Slope bracket width below which a surviving jump is accepted.
    pub min_bracket: f64,
    /// Grid runs.
    pub ba: BaOptions,
    /// Refinement runs; convergence is slow near the critical slope.
    pub refine_ba: BaOptions,
}

impl Default for SlopeScanOptions {
    fn default() -> Self {
        Self {
            min_slope: -20.0,
            max_slope: -1e-3,
            slopes: 200,
            jump_tolerance: 1e-3,
            line_tolerance: 1e-6,
            min_bracket: 1e-4,
            ba: BaOptions {
                tol: 1e-10,
                ..BaOptions::default()
            },
            refine_ba: BaOptions {
                max_iters: 50_000_000,
                tol: 1e-10,
            },
        }
    }
}

/// A certified affine piece `[d_start, d_end]` of the RD curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearSegment {
    pub slope: f64,
    pub d_start: f64,
    pub rate_start: f64,
    pub d_end: f64,
    pub rate_end: f64,
    /// Largest deviation from the line seen at interior check points.
    pub max_deviation: f64,
}

impl LinearSegment {
    pub fn rate_at(&self, d: f64) -> f64 {
        self.rate_start + self.slope * (d - self.d_start)
    }
}

/// Scans Blahut–Arimoto over a slope grid and reports the straight-line
/// segment, if the distortion jumps somewhere as the slope varies.
/// Largest gap between the chord through two achievable points and the
/// better of their Blahut lower-bound lines. The curve lies between the two
/// (convexity above, Blahut below), so this bounds its distance from the chord.
fn certify(lo: &BaPoint, hi: &BaPoint) -> f64 {
    let slope = (hi.rate - lo.rate) / (hi.distortion - lo.distortion);
    (1..8)
        .map(|j| {
            let d = lo.distortion + (hi.distortion - lo.distortion) * j as f64 / 8.0;
            let chord = lo.rate + slope * (d - lo.distortion);
            let below = (lo.rate_lower + lo.slope * (d - lo.distortion))
                .max(hi.rate_lower + hi.slope * (d - hi.distortion));
            chord - below
        })
        .fold(0.0, f64::max)
}

pub fn slope_scan(
    source: &[f64],
    matrix: &[Vec<f64>],
    opts: &SlopeScanOptions,
) -> Result<LinearSegment, StraightLineError> {
    let ba = |s: f64| blahut_arimoto(source, matrix, s, &opts.ba);
    let step = (opts.max_slope - opts.min_slope) / (opts.slopes - 1) as f64;
    let pts: Vec<BaPoint> = (0..opts.slopes)
        .map(|i| ba(opts.min_slope + step * i as f64))
        .collect::<Result<_, _>>()?;
    let k = (0..pts.len() - 1)
        .max_by(|&a, &b| {
            let ga = pts[a + 1].distortion - pts[a].distortion;
            let gb = pts[b + 1].distortion - pts[b].distortion;
            ga.total_cmp(&gb)
        })
        .expect("at least two slopes");
    // Shrink the slope bracket until the line is certified. A jump
    // survives shrinking, a continuous rise does not.
    let (mut lo, mut hi) = (pts[k].clone(), pts[k + 1].clone());
    let d_star = cutoff_distortion(source, matrix);
    loop {
        let jump = hi.distortion - lo.distortion;
        if jump < opts.jump_tolerance {
            return Err(StraightLineError::SegmentNotLinear { jump });
        }
        let dev = certify(&lo, &hi);
        let width = hi.slope - lo.slope;
        if width <= opts.min_bracket && dev <= opts.line_tolerance {
            break;
        }
        if width <= 1e-12 {
            return Err(StraightLineError::SegmentNotAffine {
                deviation: dev,
                tolerance: opts.line_tolerance,
            });
        }
        let mid = blahut_arimoto(source, matrix, 0.5 * (lo.slope + hi.slope), &opts.refine_ba)?;
        if mid.distortion - lo.distortion > hi.distortion - mid.distortion {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // The zero-rate point (D*, 0) is exactly achievable by a constant
    // reconstruction; anchor the chord there and keep the hi lower line.
    let end = BaPoint {
        distortion: d_star,
        rate: 0.0,
        rate_lower: hi.rate_lower + hi.slope * (d_star - hi.distortion),
        ..hi.clone()
    };
    let dev = certify(&lo, &end);
    if dev > opts.line_tolerance {
        return Err(StraightLineError::SegmentNotTerminal {
            end: hi.distortion,
            d_star,
        });
    }
    let seg = LinearSegment {
        slope: -lo.rate / (d_star - lo.distortion),
        d_start: lo.distortion,
        rate_start: lo.rate,
        d_end: d_star,
        rate_end: 0.0,
        max_deviation: dev,
    };
    Ok(seg)
}

/// A general pair with a certified terminal segment, ready for the flag code.
#[derive(Debug, Clone)]
pub struct StraightLineScheme {
    pub source: Vec<f64>,
    pub matrix: DistortionMatrix,
    pub segment: LinearSegment,
    /// Zero-rate reconstruction symbol.
    pub y0: usize,
    /// Symmetric pair on the remaining reconstruction symbols.
    pub sub_pair: SymmetricPair,
    /// Original column index of each sub-pair column.
    pub sub_columns: Vec<usize>,
    pub theta: f64,
}

impl StraightLineScheme {
    pub fn new(
        source: Vec<f64>,
        matrix: DistortionMatrix,
        theta: f64,
        opts: &SlopeScanOptions,
    ) -> Result<Self, StraightLineError> {
        if !(0.0..1.0).contains(&theta) {
            return Err(StraightLineError::QuantileDegenerate(format!(
                "theta {theta} not in [0, 1)"
            )));
        }
        let k = source.len();
        if source.iter().any(|&p| (p - 1.0 / k as f64).abs() > 1e-12) {
            return Err(StraightLineError::Unsupported(
                "source must be uniform".into(),
            ));
        }
        let m = matrix.to_f64();
        let segment = slope_scan(&source, &m, opts)?;
        let y0 = (0..matrix.cols())
            .min_by(|&a, &b| {
                let ea: f64 = m.iter().map(|r| r[a]).sum();
                let eb: f64 = m.iter().map(|r| r[b]).sum();
                ea.total_cmp(&eb)
            })
            .expect("nonempty");
        let sub_columns: Vec<usize> = (0..matrix.cols()).filter(|&y| y != y0).collect();
        let rows = matrix
            .entries()
            .iter()
            .map(|r| sub_columns.iter().map(|&y| r[y].clone()).collect())
            .collect();
        let sub_pair = crate::model::validate_pair(rows).map_err(|e| {
            StraightLineError::Unsupported(format!("sub-pair is not symmetric: {e}"))
        })?;
        let sub_rate = rate_distortion(&sub_pair, segment.d_start)?.rate;
        if (sub_rate - segment.rate_start).abs() > 1e-6 {
            return Err(StraightLineError::Unsupported(format!(
                "segment start rate {} differs from the sub-pair rate {sub_rate}",
                segment.rate_start
            )));
        }
        Ok(Self {
            source,
            matrix,
            segment,
            y0,
            sub_pair,
            sub_columns,
            theta,
        })
    }

    /// Uniform binary source, reconstructions `{0, 1, e}`, with erasure cost
    /// `a`: `d = [[0, 1, a], [1, 0, a]]`.
    pub fn erasure_instance(a: BigRational, theta: f64) -> Result<Self, StraightLineError> {
        let one = BigRational::from_integer(1.into());
        let zero = BigRational::zero();
        let rows = vec![
            vec![zero.clone(), one.clone(), a.clone()],
            vec![one, zero, a],
        ];
        Self::new(
            vec![0.5, 0.5],
            DistortionMatrix::new(rows)?,
            theta,
            &SlopeScanOptions::default(),
        )
    }

    pub fn d_star(&self) -> f64 {
        self.segment.d_end
    }

    /// `D = θ·D* + (1-θ)·D0`.
    pub fn target_distortion(&self) -> f64 {
        self.theta * self.d_star() + (1.0 - self.theta) * self.segment.d_start
    }

    pub fn target_rate(&self) -> f64 {
        self.segment.rate_at(self.target_distortion())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DemoMode {
    /// Real codebook search and decode.
    Encoded,
    /// Code length and distortion drawn from their exact laws.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StraightLineRow {
    pub n: usize,
    pub mode: DemoMode,
    pub trials: u64,
    pub theta: f64,
    pub d_target: f64,
    /// Non-flag radius `floor(n·Q·D0)/(n·Q)`.
    pub d0_grid: f64,
    pub flag_fraction: f64,
    pub mean_distortion: f64,
    pub max_distortion_coded: f64,
    pub rate_target_nats: f64,
    pub mean_bits_golomb: f64,
    pub mean_bits_elias: f64,
    pub normalized_redundancy_golomb: f64,
    pub normalized_redundancy_elias: f64,
    /// Exact expectations of the two measured redundancy columns.
    pub expected_normalized_redundancy_golomb: f64,
    pub expected_normalized_redundancy_elias: f64,
    pub one_minus_theta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StraightLineReport {
    pub segment: LinearSegment,
    pub theta: f64,
    pub rows: Vec<StraightLineRow>,
}

/// Uniform in `(0, 1]` from 53 bits of `w`.
fn unit(w: u64) -> f64 {
    ((w >> 11) + 1) as f64 / (1u64 << 53) as f64
}

/// Quantile rule for the flag set on the integer grid of `d(x^n, y0^n)`.
struct FlagRule {
    threshold: u64,
    boundary_prob: f64,
}

fn flag_rule(scheme: &StraightLineScheme, n: usize) -> Result<FlagRule, StraightLineError> {
    let k = scheme.source.len();
    let column: Vec<u64> = (0..k).map(|x| scheme.matrix.scaled(x, scheme.y0)).collect();
    let max_v = *column.iter().max().expect("nonempty") as usize;
    let mut law = vec![1.0f64];
    for _ in 0..n {
        let mut next = vec![0.0; law.len() + max_v];
        for (t, &q) in law.iter().enumerate() {
            for (x, &v) in column.iter().enumerate() {
                next[t + v as usize] += q * scheme.source[x];
            }
        }
        law = next;
    }
    let mut below = 0.0;
    for (t, &q) in law.iter().enumerate() {
        if q > 0.0 && below + q >= scheme.theta {
            return Ok(FlagRule {
                threshold: t as u64,
                boundary_prob: (scheme.theta - below) / q,
            });
        }
        below += q;
    }
    Ok(FlagRule {
        threshold: law.len() as u64,
        boundary_prob: 0.0,
    })
}

/// Code lengths drawn from the exact law of the first in-ball index.
struct IndexLengthSampler {
    ln_lambda: f64,
    ln_m: f64,
    k: u64,
    short_fraction: f64,
}

impl IndexLengthSampler {
    fn new(law: &IndexDistribution, m: &num_bigint::BigUint) -> Self {
        let p = law.p();
        let ln_lambda = law.ln_p() + (-ln1m_over(p)).ln();
        let (k, u) = truncated_binary_layout(m);
        let short_fraction = if u.is_zero() {
            0.0
        } else {
            (ln_biguint(&u) - ln_biguint(m)).exp()
        };
        Self {
            ln_lambda,
            ln_m: ln_biguint(m),
            k,
            short_fraction,
        }
    }

    /// `(golomb bits, elias bits)` for `I - 1 = floor(E / λ)`.
    fn lengths(&self, e: f64) -> (f64, f64) {
        let y = (e.ln() - self.ln_lambda - self.ln_m).exp();
        let q = y.floor();
        let short = (y - q) < self.short_fraction;
        let golomb = q + 1.0 + self.k as f64 - if short { 1.0 } else { 0.0 };
        let ln_i = e.ln() - self.ln_lambda;
        let elias = if ln_i < 50.0 {
            let i = (e / self.ln_lambda.exp()).floor() as u64 + 1;
            elias_delta_length(&i.into()) as f64
        } else {
            let bits = (ln_i / std::f64::consts::LN_2).floor() as u64 + 1;
            elias_delta_length_bits(bits) as f64
        };
        (golomb, elias)
    }
}

/// Runs the flag code at each blocklength. Rows with expected index at most
/// `encode_limit` use the real encoder; the rest sample from exact laws.
pub fn straightline_demo(
    scheme: &StraightLineScheme,
    n_grid: &[usize],
    trials: u64,
    seed: u64,
    encode_limit: f64,
) -> Result<StraightLineReport, StraightLineError> {
    let rows = n_grid
        .iter()
        .map(|&n| demo_row(scheme, n, trials, seed, encode_limit))
        .collect::<Result<_, _>>()?;
    Ok(StraightLineReport {
        segment: scheme.segment,
        theta: scheme.theta,
        rows,
    })
}

fn demo_row(
    scheme: &StraightLineScheme,
    n: usize,
    trials: u64,
    seed: u64,
    encode_limit: f64,
) -> Result<StraightLineRow, StraightLineError> {
    let sub = &scheme.sub_pair;
    let q = sub.scale();
    let nq = n as u64 * q;
    // Largest grid radius not above the segment start.
    let d0_num = (scheme.segment.d_start * nq as f64 - 1e-9).floor() as u64;
    let d0 = BigRational::new(BigInt::from(d0_num), BigInt::from(nq));
    let d0_f = rational_to_f64(&d0);
    if d0_num == 0 {
        return Err(StraightLineError::QuantileDegenerate(format!(
            "n = {n} leaves no room below D0"
        )));
    }
    let spec = spectrum(sub, n)?;
    let t0 = spec.threshold(&d0)?;
    let law = IndexDistribution::from_exact(spec.ball_probability(t0));
    let m = law.golomb_parameter();
    let ball = spec.ball_conditional(t0);
    let ball_cdf: Vec<f64> = ball
        .iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    let sampler = IndexLengthSampler::new(&law, &m);
    let mode = if law.ln_p() >= -encode_limit.ln() {
        DemoMode::Encoded
    } else {
        DemoMode::Sampled
    };
    let rule = flag_rule(scheme, n)?;
    let codec = match mode {
        DemoMode::Encoded => Some(Codec::new(sub, n, d0.clone(), seed, Scheme::Golomb)?),
        DemoMode::Sampled => None,
    };
    let k = scheme.source.len();
    let scale = scheme.matrix.scale() as f64;
    let nf = n as f64;
    let (mut flags, mut dist_sum, mut max_coded) = (0u64, 0.0f64, 0.0f64);
    let (mut bits_g, mut bits_e) = (0.0f64, 0.0f64);
    for t in 0..trials {
        let st = mix64(seed ^ t);
        let x: Vec<usize> = (0..n as u64)
            .map(|j| (mix64(st ^ (j << 1 | 1)) % k as u64) as usize)
            .collect();
        let t_y0: u64 = x
            .iter()
            .map(|&xs| scheme.matrix.scaled(xs, scheme.y0))
            .sum();
        let coin = unit(mix64(st ^ 0x5EED));
        let in_s = t_y0 < rule.threshold || (t_y0 == rule.threshold && coin <= rule.boundary_prob);
        if in_s {
            flags += 1;
            dist_sum += t_y0 as f64 / (nf * scale);
            bits_g += 1.0;
            bits_e += 1.0;
            continue;
        }
        let (d, lg, le) = match &codec {
            Some(c) => {
                let c = c.reseeded(mix64(st ^ 0xC0DE));
                let e = c.encode(&x)?;
                let y = c.decode(&e.bits)?;
                let total: u64 = x
                    .iter()
                    .zip(&y)
                    .map(|(&xs, &ys)| scheme.matrix.scaled(xs, scheme.sub_columns[ys]))
                    .sum();
                let d = total as f64 / (nf * scale);
                (
                    d,
                    e.bits.len() as f64,
                    elias_delta_length(&e.index.into()) as f64,
                )
            }
            None => {
                let e = -unit(mix64(st ^ 0xE)).ln();
                let (g, el) = sampler.lengths(e);
                let u = unit(mix64(st ^ 0xD));
                let idx = ball_cdf.partition_point(|&c| c < u).min(ball_cdf.len() - 1);
                (idx as f64 / nq as f64, g, el)
            }
        };
        debug_assert!(d <= d0_f + 1e-12);
        max_coded = max_coded.max(d);
        dist_sum += d;
        bits_g += 1.0 + lg;
        bits_e += 1.0 + le;
    }
    let tr = trials as f64;
    let rate = scheme.target_rate();
    let norm = |bits: f64| (bits * std::f64::consts::LN_2 / nf - rate) * nf / nf.ln();
    let expected = |sub_bits: f64| norm(1.0 + (1.0 - scheme.theta) * sub_bits);
    Ok(StraightLineRow {
        n,
        mode,
        trials,
        theta: scheme.theta,
        d_target: scheme.target_distortion(),
        d0_grid: d0_f,
        flag_fraction: flags as f64 / tr,
        mean_distortion: dist_sum / tr,
        max_distortion_coded: max_coded,
        rate_target_nats: rate,
        mean_bits_golomb: bits_g / tr,
        mean_bits_elias: bits_e / tr,
        normalized_redundancy_golomb: norm(bits_g / tr),
        normalized_redundancy_elias: norm(bits_e / tr),
        expected_normalized_redundancy_golomb: expected(law.expected_golomb_bits(&m)),
        expected_normalized_redundancy_elias: expected(law.expected_elias_bits()),
        one_minus_theta: 1.0 - scheme.theta,
    })
}
