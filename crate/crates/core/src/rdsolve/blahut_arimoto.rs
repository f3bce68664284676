//! Blahut–Arimoto for arbitrary finite source laws and distortion matrices.
//!
//! Parameterized by the slope `s < 0`: each run returns one point of the
//! curve, the point where the supporting line of slope `s` touches it.
//! Convergence is declared when the gap between Blahut's upper and lower
//! bounds on the rate falls below the tolerance.

use super::RdError;

#[derive(Debug, Clone, Copy)]
pub struct BaOptions {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for BaOptions {
    fn default() -> Self {
        Self {
            max_iters: 200_000,
            tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaPoint {
    pub slope: f64,
    pub distortion: f64,
    /// Mutual information of the final channel (an upper bound on `R(D)`).
    pub rate: f64,
    /// Blahut's lower bound on `R(D)` at the final iterate.
    pub rate_lower: f64,
    /// Output marginal of the final channel.
    pub output: Vec<f64>,
    pub iterations: usize,
    /// Final gap between Blahut's upper and lower rate bounds.
    pub gap: f64,
}

fn check_input(source: &[f64], matrix: &[Vec<f64>]) -> Result<(), RdError> {
    if source.is_empty() || source.len() != matrix.len() {
        return Err(RdError::BadInput(
            "source law and matrix rows differ in length".into(),
        ));
    }
    let cols = matrix[0].len();
    if cols == 0 || matrix.iter().any(|r| r.len() != cols) {
        return Err(RdError::BadInput("ragged or empty matrix".into()));
    }
    if source.iter().any(|&p| p.is_nan() || p < 0.0)
        || (source.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(RdError::BadInput(
            "source law is not a probability vector".into(),
        ));
    }
    Ok(())
}

/// `min_y E[d(X, y)]`: the zero-rate distortion of a general pair.
pub fn cutoff_distortion(source: &[f64], matrix: &[Vec<f64>]) -> f64 {
    (0..matrix[0].len())
        .map(|y| {
            source
                .iter()
                .zip(matrix)
                .map(|(p, row)| p * row[y])
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn blahut_arimoto(
    source: &[f64],
    matrix: &[Vec<f64>],
    slope: f64,
    opts: &BaOptions,
) -> Result<BaPoint, RdError> {
    let pt = blahut_arimoto_budgeted(source, matrix, slope, opts)?;
    if pt.gap > opts.tol {
        return Err(RdError::NonConvergence {
            iterations: pt.iterations,
            gap: pt.gap,
        });
    }
    Ok(pt)
}

/// Like [`blahut_arimoto`] but returns the last iterate when the iteration
/// budget runs out. Its `rate_lower` line is a valid lower bound on the curve
/// regardless of convergence, and `(distortion, rate)` is achievable.
pub fn blahut_arimoto_budgeted(
    source: &[f64],
    matrix: &[Vec<f64>],
    slope: f64,
    opts: &BaOptions,
) -> Result<BaPoint, RdError> {
    check_input(source, matrix)?;
    if slope.is_nan() || slope > 0.0 {
        return Err(RdError::BadInput(format!(
            "slope must be non-positive, got {slope}"
        )));
    }
    let cols = matrix[0].len();
    // Row-shifted kernel exp(s (d - min_row d)); the shift cancels in every ratio.
    let shift: Vec<f64> = matrix
        .iter()
        .map(|r| r.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let kernel: Vec<Vec<f64>> = matrix
        .iter()
        .zip(&shift)
        .map(|(row, m)| row.iter().map(|d| (slope * (d - m)).exp()).collect())
        .collect();

    let mut q = vec![1.0 / cols as f64; cols];
    let mut z = vec![0.0; matrix.len()];
    let mut c = vec![0.0; cols];
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        for (zx, row) in z.iter_mut().zip(&kernel) {
            *zx = row.iter().zip(&q).map(|(a, qy)| a * qy).sum();
        }
        for (y, cy) in c.iter_mut().enumerate() {
            *cy = source
                .iter()
                .zip(&kernel)
                .zip(&z)
                .filter(|((&p, _), _)| p > 0.0)
                .map(|((p, row), zx)| p * row[y] / zx)
                .sum();
        }
        let max_ln_c = c.iter().map(|v| v.ln()).fold(f64::NEG_INFINITY, f64::max);
        let avg: f64 = q
            .iter()
            .zip(&c)
            .filter(|(&qy, _)| qy > 0.0)
            .map(|(qy, cy)| qy * cy * cy.ln())
            .sum();
        gap = max_ln_c - avg;
        for (qy, cy) in q.iter_mut().zip(&c) {
            *qy *= cy;
        }
        let total: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= total);
        if gap <= opts.tol {
            break;
        }
    }

    // Final channel from the updated output law.
    let mut ln_z_avg = 0.0;
    let mut channel = Vec::with_capacity(matrix.len());
    for ((&p, kr), m) in source.iter().zip(&kernel).zip(&shift) {
        let zx: f64 = kr.iter().zip(&q).map(|(a, qy)| a * qy).sum();
        if p > 0.0 {
            ln_z_avg += p * (zx.ln() + slope * m);
        }
        channel.push(
            kr.iter()
                .zip(&q)
                .map(|(a, qy)| qy * a / zx)
                .collect::<Vec<f64>>(),
        );
    }
    let mut output = vec![0.0; cols];
    let mut distortion = 0.0;
    for ((&p, row), w) in source.iter().zip(matrix).zip(&channel) {
        for y in 0..cols {
            output[y] += p * w[y];
            distortion += p * w[y] * row[y];
        }
    }
    let mut rate = 0.0;
    for (&p, w) in source.iter().zip(&channel) {
        for y in 0..cols {
            if p > 0.0 && w[y] > 0.0 {
                rate += p * w[y] * (w[y] / output[y]).ln();
            }
        }
    }
    let max_ln_c = c.iter().map(|v| v.ln()).fold(f64::NEG_INFINITY, f64::max);
    let rate_lower = slope * distortion - ln_z_avg - max_ln_c;
    Ok(BaPoint {
        slope,
        distortion,
        rate: rate.max(0.0),
        rate_lower,
        output,
        iterations,
        gap,
    })
}

/// The curve point at a target distortion, by bisection on the slope.
///
/// Only meaningful where the distortion is a continuous function of the
/// slope, i.e. away from straight-line segments.
pub fn blahut_arimoto_at_distortion(
    source: &[f64],
    matrix: &[Vec<f64>],
    target: f64,
    opts: &BaOptions,
) -> Result<BaPoint, RdError> {
    check_input(source, matrix)?;
    let cutoff = cutoff_distortion(source, matrix);
    if target.is_nan() || target <= 0.0 {
        return Err(RdError::BadInput(format!(
            "target distortion must be positive, got {target}"
        )));
    }
    if target >= cutoff {
        return blahut_arimoto(source, matrix, 0.0, opts);
    }
    let mut lo = -1.0;
    let mut lo_pt = blahut_arimoto(source, matrix, lo, opts)?;
    while lo_pt.distortion > target {
        if lo < -1e4 {
            return Err(RdError::BadInput(format!("target {target} unreachable")));
        }
        lo *= 2.0;
        lo_pt = blahut_arimoto(source, matrix, lo, opts)?;
    }
    let mut hi = 0.0;
    let mut best = lo_pt;
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let pt = blahut_arimoto(source, matrix, mid, opts)?;
        if pt.distortion > target {
            hi = mid;
        } else {
            lo = mid;
        }
        if (pt.distortion - target).abs() < (best.distortion - target).abs() {
            best = pt;
        }
    }
    // First-order correction along the supporting line.
    let shift = target - best.distortion;
    best.rate += best.slope * shift;
    best.rate_lower += best.slope * shift;
    best.distortion = target;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hamming(k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let m = (0..k)
            .map(|x| (0..k).map(|y| if x == y { 0.0 } else { 1.0 }).collect())
            .collect();
        (vec![1.0 / k as f64; k], m)
    }

    #[test]
    fn binary_hamming_at_ln3() {
        let (p, m) = hamming(2);
        let pt = blahut_arimoto(&p, &m, -3f64.ln(), &BaOptions::default()).unwrap();
        assert!((pt.distortion - 0.25).abs() < 1e-8);
        assert!((pt.rate - 0.130812).abs() < 1e-6);
        assert!(pt.rate - pt.rate_lower < 1e-10);
    }

    #[test]
    fn near_cutoff_slope() {
        let (p, m) = hamming(2);
        let pt = blahut_arimoto(&p, &m, -1e-6, &BaOptions::default()).unwrap();
        assert!(pt.rate <= 1e-6);
        assert!((pt.distortion - 0.5).abs() < 1e-6);
    }

    #[test]
    fn non_uniform_source_cutoff() {
        let p = [0.8, 0.2];
        let m = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!((cutoff_distortion(&p, &m) - 0.2).abs() < 1e-15);
        // Any slope shallower than R'(D*-) = -ln 4 lands on the zero-rate point.
        let pt = blahut_arimoto(&p, &m, -0.5, &BaOptions::default()).unwrap();
        assert!(pt.rate < 1e-9 && (pt.distortion - 0.2).abs() < 1e-9);
        // Binary source: R(D) = h(0.2) - h(D).
        let h = |x: f64| -x * x.ln() - (1.0 - x) * (1.0 - x).ln();
        let at = blahut_arimoto_at_distortion(&p, &m, 0.1, &BaOptions::default()).unwrap();
        assert!((at.rate - (h(0.2) - h(0.1))).abs() < 1e-8, "{}", at.rate);
    }

    #[test]
    fn targeted_matches_closed_form() {
        let (p, m) = hamming(3);
        let d: f64 = 1.0 / 3.0;
        let h = -d * d.ln() - (1.0 - d) * (1.0 - d).ln();
        let pt = blahut_arimoto_at_distortion(&p, &m, d, &BaOptions::default()).unwrap();
        assert!((pt.rate - (3f64.ln() - h - d * 2f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let m = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(blahut_arimoto(&[0.5, 0.6], &m, -1.0, &BaOptions::default()).is_err());
        assert!(blahut_arimoto(&[0.5, 0.5], &m, 1.0, &BaOptions::default()).is_err());
        let opts = BaOptions {
            max_iters: 1,
            tol: 0.0,
        };
        assert!(matches!(
            blahut_arimoto(&[0.9, 0.1], &m, -2.0, &opts),
            Err(RdError::NonConvergence { .. })
        ));
    }
}
